#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftless/metrics.hpp"

/// Aggregates a run directory into comma-delimited plot tables. The directory
/// is either a single run (holds per_step.jsonl directly) or a set of named
/// runs in subdirectories, which end up overlaid via the "run" column.
namespace driftless::report {

namespace fs = std::filesystem;

struct RunData {
    std::string name;
    std::vector<metrics::json> completions;
    std::vector<metrics::json> steps;
    metrics::json summary;
};

struct ReportResult {
    std::vector<std::string> tables_written;
    std::vector<std::string> errors;  // one per unreadable/corrupt file
    std::optional<double> hard_length_ratio_dap_over_lp;
};

namespace detail {

inline bool load_run(const fs::path& dir, const std::string& name, std::vector<RunData>& runs,
                     std::vector<std::string>& errors) {
    RunData run;
    run.name = name;
    bool ok = true;
    try {
        run.completions =
            metrics::read_jsonl((dir / "per_completion.jsonl").string(), metrics::completion_keys());
    } catch (const std::exception& e) {
        errors.emplace_back(e.what());
        ok = false;
    }
    try {
        run.steps = metrics::read_jsonl((dir / "per_step.jsonl").string(), metrics::step_keys());
    } catch (const std::exception& e) {
        errors.emplace_back(e.what());
        ok = false;
    }
    try {
        run.summary = metrics::read_summary((dir / "summary.json").string());
    } catch (const std::exception& e) {
        errors.emplace_back(e.what());
        ok = false;
    }
    if (ok) runs.push_back(std::move(run));
    return ok;
}

inline std::ofstream open_table(const fs::path& out_dir, const std::string& name,
                                ReportResult& result) {
    std::ofstream out(out_dir / name);
    if (!out)
        result.errors.push_back("report: cannot write " + (out_dir / name).string());
    else
        result.tables_written.push_back(name);
    return out;
}

} // namespace detail

inline ReportResult generate(const std::string& run_dir) {
    ReportResult result;
    const fs::path root(run_dir);
    if (!fs::is_directory(root)) {
        result.errors.push_back("report: " + run_dir + " is not a directory");
        return result;
    }

    std::vector<RunData> runs;
    if (fs::exists(root / "per_step.jsonl")) {
        detail::load_run(root, "run", runs, result.errors);
    } else {
        std::vector<fs::path> subdirs;
        for (const auto& entry : fs::directory_iterator(root))
            if (entry.is_directory() && fs::exists(entry.path() / "per_step.jsonl"))
                subdirs.push_back(entry.path());
        std::sort(subdirs.begin(), subdirs.end());
        for (const auto& d : subdirs) detail::load_run(d, d.filename().string(), runs, result.errors);
    }
    if (runs.empty()) {
        result.errors.push_back("report: no runs with metrics found in " + run_dir);
        return result;
    }

    {
        auto out = detail::open_table(root, "reward_by_domain.csv", result);
        out << "run,step,domain,domain_name,expected_reward\n";
        for (const auto& run : runs) {
            const auto names = run.summary.value("domain_names", metrics::json::array());
            for (const auto& s : run.steps) {
                const auto& rewards = s.at("domain_expected_reward");
                for (std::size_t d = 0; d < rewards.size(); ++d)
                    out << run.name << "," << s.at("step") << "," << d << ","
                        << (d < names.size() ? names[d].get<std::string>() : std::to_string(d))
                        << "," << rewards[d].get<double>() << "\n";
            }
        }
    }

    {
        auto out = detail::open_table(root, "length_by_class.csv", result);
        out << "run,step,expected_length_easy,expected_length_hard\n";
        for (const auto& run : runs)
            for (const auto& s : run.steps)
                out << run.name << "," << s.at("step") << ","
                    << s.at("expected_length_easy").get<double>() << ","
                    << s.at("expected_length_hard").get<double>() << "\n";
    }

    {
        auto out = detail::open_table(root, "mixture_by_completions.csv", result);
        out << "run,completions_total,domain,domain_name,share\n";
        for (const auto& run : runs) {
            const auto names = run.summary.value("domain_names", metrics::json::array());
            std::vector<std::uint64_t> counts(names.empty() ? 8 : names.size(), 0);
            std::uint64_t total = 0;
            for (const auto& c : run.completions) {
                const auto d = c.at("domain").get<std::size_t>();
                const auto g = c.at("group_size").get<std::uint64_t>();
                if (d >= counts.size()) counts.resize(d + 1, 0);
                counts[d] += g;
                total += g;
                for (std::size_t k = 0; k < counts.size(); ++k)
                    out << run.name << "," << c.at("completions_total") << "," << k << ","
                        << (k < names.size() ? names[k].get<std::string>() : std::to_string(k))
                        << "," << static_cast<double>(counts[k]) / static_cast<double>(total)
                        << "\n";
            }
        }
    }

    {
        auto out = detail::open_table(root, "version_lag_hist.csv", result);
        out << "run,lag,count\n";
        for (const auto& run : runs) {
            std::map<std::uint64_t, std::uint64_t> hist;
            for (const auto& s : run.steps)
                for (const auto& l : s.at("lags")) hist[l.get<std::uint64_t>()] += 1;
            for (const auto& [lag, count] : hist)
                out << run.name << "," << lag << "," << count << "\n";
        }
    }

    // paired LP/DAP runs: report the headline hard-class length ratio
    const RunData* dap = nullptr;
    const RunData* lp = nullptr;
    for (const auto& run : runs) {
        const std::string mode = run.summary.value("penalty_mode", "");
        if (mode == "dap" && !dap) dap = &run;
        if (mode == "lp" && !lp) lp = &run;
    }
    if (runs.size() == 2 && dap && lp) {
        const double dap_len = dap->summary.value("final_expected_length_hard", 0.0);
        const double lp_len = lp->summary.value("final_expected_length_hard", 0.0);
        if (lp_len > 0.0) {
            result.hard_length_ratio_dap_over_lp = dap_len / lp_len;
            metrics::json j;
            j["dap_run"] = dap->name;
            j["lp_run"] = lp->name;
            j["final_expected_length_hard_dap"] = dap_len;
            j["final_expected_length_hard_lp"] = lp_len;
            j["hard_length_ratio_dap_over_lp"] = *result.hard_length_ratio_dap_over_lp;
            std::ofstream out(root / "length_ratio_summary.json");
            if (out) {
                out << j.dump(2) << "\n";
                result.tables_written.push_back("length_ratio_summary.json");
            } else {
                result.errors.push_back("report: cannot write length_ratio_summary.json");
            }
        }
    }

    return result;
}

} // namespace driftless::report
