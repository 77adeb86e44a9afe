#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delstab/model.hpp"
#include "delstab/switch_analysis.hpp"

namespace delstab {

/// Per-coefficient ranges and point counts for a planar grid scan.
struct GridSpec {
    std::array<std::pair<double, double>, 4> ranges{};
    std::array<int, 4> counts{};

    std::int64_t total_points() const;
    std::array<double, 4> point(std::int64_t index) const;
};

enum class CellStatus { Ok, NonGeneric, Irreducible };

std::string to_string(CellStatus s);

struct ScanCell {
    std::array<double, 4> coeffs{};
    int switch_count = -1; // valid when status == Ok; switches within [0, tau_max]
    CellStatus status = CellStatus::Ok;
};

struct ScanOptions {
    Placement placement = Placement::Own;
    double tau_max = 10.0;
    std::vector<int> requested;    // switch counts to collect witnesses for
    double verify_fraction = 0.0;  // fraction of Ok cells re-checked by the oracle
    std::uint64_t seed = 1;
    bool parallel = true;
};

struct ScanResult {
    std::vector<ScanCell> cells; // indexed by grid order
    std::map<int, std::vector<std::int64_t>> witnesses;
    std::int64_t verified = 0;
    bool verification_failed = false;
    std::optional<std::int64_t> first_disagreement_index;
};

/// Switch count per grid point. The parallel path distributes cells over
/// OpenMP threads; results are keyed by grid index so both paths produce
/// identical output. Used directly by the CLI and by the benchmark.
ScanResult scan_grid(const GridSpec& grid, const ScanOptions& opt);
ScanResult scan_grid_serial(const GridSpec& grid, const ScanOptions& opt);
ScanResult scan_grid_parallel(const GridSpec& grid, const ScanOptions& opt);

} // namespace delstab
