#include "delstab/scan.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "delstab/errors.hpp"
#include "delstab/spectral_oracle.hpp"

namespace delstab {

std::int64_t GridSpec::total_points() const {
    std::int64_t n = 1;
    for (int c : counts) {
        if (c < 1) throw ConfigError("grid counts must be >= 1");
        n *= c;
    }
    return n;
}

std::array<double, 4> GridSpec::point(std::int64_t index) const {
    std::array<double, 4> a{};
    for (int d = 3; d >= 0; --d) {
        const std::int64_t c = counts[d];
        const std::int64_t i = index % c;
        index /= c;
        const auto [lo, hi] = ranges[d];
        a[d] = c == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(c - 1);
    }
    return a;
}

std::string to_string(CellStatus s) {
    switch (s) {
        case CellStatus::Ok:         return "ok";
        case CellStatus::NonGeneric: return "non_generic";
        case CellStatus::Irreducible:return "irreducible";
    }
    return "?";
}

namespace {

// splitmix-style hash onto [0, 1), used for the deterministic verification
// subset selection
double cell_hash01(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t h = seed * 0x9e3779b97f4a7c15ull + index + 1;
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct CellOutcome {
    ScanCell cell;
    bool verified = false;
    bool disagreed = false;
};

CellOutcome evaluate_cell(const GridSpec& grid, const ScanOptions& opt, std::int64_t index) {
    CellOutcome out;
    out.cell.coeffs = grid.point(index);
    const auto& a = out.cell.coeffs;
    DelaySystem sys;
    try {
        sys = build_system(InteractionMatrix::planar(a[0], a[1], a[2], a[3]),
                           DelayPlacement{opt.placement});
    } catch (const ConfigError&) {
        out.cell.status = CellStatus::NonGeneric;
        return out;
    }
    try {
        SwitchReport rep;
        if (opt.placement == Placement::Full)
            rep = zsubstitution_analysis(sys, opt.tau_max);
        else
            rep = enumerate_switches(sys, opt.tau_max);
        out.cell.switch_count = static_cast<int>(rep.switches.size());
        out.cell.status = CellStatus::Ok;
        if (opt.verify_fraction > 0.0 &&
            cell_hash01(opt.seed, static_cast<std::uint64_t>(index)) < opt.verify_fraction) {
            out.verified = true;
            const auto agreement = verify_report(rep, quasi_polynomial(sys));
            out.disagreed = !agreement.agreed;
        }
    } catch (const NonGenericError&) {
        const QuasiPolynomial w = quasi_polynomial(sys);
        out.cell.status =
            has_single_exponential(w) ? CellStatus::NonGeneric : CellStatus::Irreducible;
    }
    return out;
}

ScanResult assemble(const ScanOptions& opt, std::vector<CellOutcome>&& res) {
    ScanResult r;
    r.cells.reserve(res.size());
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(res.size()); ++i) {
        auto& o = res[static_cast<size_t>(i)];
        if (o.verified) ++r.verified;
        if (o.disagreed) {
            r.verification_failed = true;
            if (!r.first_disagreement_index) r.first_disagreement_index = i;
        }
        for (int want : opt.requested)
            if (o.cell.status == CellStatus::Ok && o.cell.switch_count == want)
                r.witnesses[want].push_back(i);
        r.cells.push_back(std::move(o.cell));
    }
    for (int want : opt.requested)
        r.witnesses.try_emplace(want); // present even when empty
    return r;
}

} // namespace

ScanResult scan_grid_serial(const GridSpec& grid, const ScanOptions& opt) {
    const std::int64_t n = grid.total_points();
    std::vector<CellOutcome> res(static_cast<size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) res[static_cast<size_t>(i)] = evaluate_cell(grid, opt, i);
    return assemble(opt, std::move(res));
}

ScanResult scan_grid_parallel(const GridSpec& grid, const ScanOptions& opt) {
    const std::int64_t n = grid.total_points();
    std::vector<CellOutcome> res(static_cast<size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 256)
#endif
    for (std::int64_t i = 0; i < n; ++i) res[static_cast<size_t>(i)] = evaluate_cell(grid, opt, i);
    return assemble(opt, std::move(res));
}

ScanResult scan_grid(const GridSpec& grid, const ScanOptions& opt) {
    if (grid.total_points() > 10000000)
        throw ConfigError("scan grid exceeds 1e7 points");
    return opt.parallel ? scan_grid_parallel(grid, opt) : scan_grid_serial(grid, opt);
}

} // namespace delstab
