#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "delstab/dde_sim.hpp"
#include "delstab/model.hpp"
#include "delstab/scan.hpp"
#include "delstab/switch_analysis.hpp"

namespace delstab {

struct HistorySpec {
    bool constant = true;
    std::vector<double> values;                // constant
    std::vector<double> times;                 // sampled
    std::vector<std::vector<double>> states;   // sampled
    HistoryFunction build(int dim) const;
};

struct ScanSpec {
    GridSpec grid;
    std::vector<int> request;
    double verify_fraction = 0.0;
    bool parallel = true;
};

struct TriadSpec {
    double window_lo = 0.0;
    double window_hi = 1.0;
    int samples = 512;
};

/// Parsed configuration; unknown keys are rejected.
struct RunConfig {
    std::optional<std::vector<double>> matrix;
    std::optional<std::string> placement;
    double a13 = 0.0;
    std::optional<double> tau;
    std::optional<double> tau_max;
    std::optional<double> horizon;
    std::optional<double> step;
    std::optional<HistorySpec> history;
    std::optional<ScanSpec> scan;
    TriadSpec triad;
    std::string out = ".";
    std::uint64_t seed = 1;

    DelaySystem build_delay_system() const; // throws ConfigError when incomplete
    double tau_max_or(double dflt) const { return tau_max.value_or(dflt); }
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

nlohmann::json to_json(const BaselineStability& b);
nlohmann::json to_json(const QuasiPolynomial& w);
nlohmann::json to_json(const SwitchEvent& ev);
nlohmann::json to_json(const SwitchReport& rep);
nlohmann::json to_json(const TheoremClassification& tc);

void write_text_file(const std::string& path, const std::string& content);
void write_report_json(const nlohmann::json& report, const std::string& dir);
void write_switches_csv(const std::vector<SwitchEvent>& switches, const std::string& dir);

} // namespace delstab
