#include "delstab/model.hpp"

#include <algorithm>
#include <cmath>

#include "delstab/errors.hpp"

namespace delstab {

InteractionMatrix InteractionMatrix::planar(double a11, double a12, double a21, double a22) {
    InteractionMatrix m;
    m.dim = 2;
    m.a11 = a11; m.a12 = a12; m.a21 = a21; m.a22 = a22;
    return m;
}

InteractionMatrix InteractionMatrix::triad(double a11, double a12, double a21, double a22,
                                           double a23, double a32, double a33) {
    InteractionMatrix m;
    m.dim = 3;
    m.a11 = a11; m.a12 = a12; m.a21 = a21; m.a22 = a22;
    m.a23 = a23; m.a32 = a32; m.a33 = a33;
    return m;
}

InteractionMatrix InteractionMatrix::from_coeffs(const std::vector<double>& coeffs) {
    if (coeffs.size() == 4)
        return planar(coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
    if (coeffs.size() == 7)
        return triad(coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4], coeffs[5], coeffs[6]);
    throw ConfigError("matrix must have 4 (planar) or 7 (triad) coefficients, got " +
                      std::to_string(coeffs.size()));
}

double InteractionMatrix::max_abs() const {
    double m = std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22)});
    if (dim == 3) m = std::max({m, std::abs(a23), std::abs(a32), std::abs(a33)});
    return m;
}

std::vector<double> InteractionMatrix::coeffs() const {
    if (dim == 2) return {a11, a12, a21, a22};
    return {a11, a12, a21, a22, a23, a32, a33};
}

std::vector<std::pair<int, int>> DelayPlacement::delayed_pairs() const {
    switch (kind) {
        case Placement::None:           return {};
        case Placement::Own:            return {{1, 1}};
        case Placement::Cross:          return {{1, 2}};
        case Placement::RowR:           return {{1, 1}, {1, 2}};
        case Placement::ColR:           return {{1, 1}, {2, 1}};
        case Placement::Diagonal:       return {{1, 1}, {2, 2}};
        case Placement::AntiDiagonal:   return {{1, 2}, {2, 1}};
        case Placement::ThreeOwnLast:   return {{1, 1}, {1, 2}, {2, 1}};
        case Placement::ThreeCrossLast: return {{1, 1}, {1, 2}, {2, 2}};
        case Placement::Full:           return {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
        case Placement::MixedSelf:      return {{1, 1}};
        case Placement::PureCross:      return {{1, 2}};
        case Placement::TriadJIn:       return {{2, 1}, {2, 3}};
        case Placement::TriadJOwn:      return {{2, 2}};
    }
    return {};
}

std::string to_string(Placement p) {
    switch (p) {
        case Placement::None:           return "none";
        case Placement::Own:            return "own";
        case Placement::Cross:          return "cross";
        case Placement::RowR:           return "row_r";
        case Placement::ColR:           return "col_r";
        case Placement::Diagonal:       return "diagonal";
        case Placement::AntiDiagonal:   return "anti_diagonal";
        case Placement::ThreeOwnLast:   return "three_own_last";
        case Placement::ThreeCrossLast: return "three_cross_last";
        case Placement::Full:           return "full";
        case Placement::MixedSelf:      return "mixed_self";
        case Placement::PureCross:      return "pure_cross";
        case Placement::TriadJIn:       return "triad_j_in";
        case Placement::TriadJOwn:      return "triad_j_own";
    }
    return "?";
}

Placement placement_from_string(const std::string& name) {
    static const std::pair<const char*, Placement> table[] = {
        {"none", Placement::None},
        {"own", Placement::Own},
        {"cross", Placement::Cross},
        {"row_r", Placement::RowR},
        {"col_r", Placement::ColR},
        {"diagonal", Placement::Diagonal},
        {"anti_diagonal", Placement::AntiDiagonal},
        {"three_own_last", Placement::ThreeOwnLast},
        {"three_cross_last", Placement::ThreeCrossLast},
        {"full", Placement::Full},
        {"mixed_self", Placement::MixedSelf},
        {"pure_cross", Placement::PureCross},
        {"triad_j_in", Placement::TriadJIn},
        {"triad_j_own", Placement::TriadJOwn},
    };
    for (const auto& [n, p] : table)
        if (name == n) return p;
    throw ConfigError("unknown placement '" + name + "'");
}

std::string to_string(BaselineVerdict v) {
    switch (v) {
        case BaselineVerdict::Stable:           return "stable";
        case BaselineVerdict::Unstable:         return "unstable";
        case BaselineVerdict::MarginalCenter:   return "marginal_center";
        case BaselineVerdict::MarginalZeroRoot: return "marginal_zero_root";
    }
    return "?";
}

BaselineStability classify_baseline(const InteractionMatrix& m) {
    if (m.dim != 2)
        throw ConfigError("classify_baseline is defined for planar matrices only");
    const double scale = std::max(1.0, m.max_abs());
    BaselineStability b;
    b.trace = m.trace();
    b.determinant = m.det();
    if (std::abs(b.determinant) <= kMarginalTol * scale * scale)
        b.verdict = BaselineVerdict::MarginalZeroRoot;
    else if (std::abs(b.trace) <= kMarginalTol * scale)
        b.verdict = b.determinant > 0 ? BaselineVerdict::MarginalCenter
                                      : BaselineVerdict::Unstable; // saddle: det < 0 decides
    else if (b.trace < 0 && b.determinant > 0)
        b.verdict = BaselineVerdict::Stable;
    else
        b.verdict = BaselineVerdict::Unstable;
    return b;
}

std::pair<std::pair<double, double>, InteractionMatrix> homogenize(const GoalModel& g) {
    // Stationarity of the goal model:
    //   c(R*-R) + d(J-R) = 0
    //   e(J*-J) + f(R-J) = 0
    // i.e. M [R,J]^T = -[c R*, e J*]^T with M the deviation coupling matrix.
    InteractionMatrix m = InteractionMatrix::planar(-g.c - g.d, g.d, g.f, -g.e - g.f);
    const double det = m.det();
    const double scale = std::max(1.0, m.max_abs());
    if (std::abs(det) <= kMarginalTol * scale * scale)
        throw NonGenericError("goal model has no unique equilibrium (singular stationarity system)");
    const double b1 = -g.c * g.rstar;
    const double b2 = -g.e * g.jstar;
    const double req = (b1 * m.a22 - m.a12 * b2) / det;
    const double jeq = (m.a11 * b2 - b1 * m.a21) / det;
    return {{req, jeq}, m};
}

DelaySystem build_system(const InteractionMatrix& m, const DelayPlacement& p) {
    for (double v : m.coeffs())
        if (!std::isfinite(v)) throw ConfigError("matrix entries must be finite");
    if (!std::isfinite(p.a13)) throw ConfigError("a13 must be finite");
    if (p.is_triad() && m.dim != 3)
        throw ConfigError("placement '" + to_string(p.kind) + "' requires a triad matrix");
    if (!p.is_triad() && m.dim != 2)
        throw ConfigError("placement '" + to_string(p.kind) + "' requires a planar matrix");
    if (p.kind == Placement::PureCross && (m.a11 != 0.0 || m.a22 != 0.0))
        throw ConfigError("pure_cross requires a11 = a22 = 0");
    if (p.kind != Placement::MixedSelf && p.a13 != 0.0)
        throw ConfigError("a13 is only meaningful for mixed_self");
    return DelaySystem{m, p};
}

InteractionMatrix effective_tau0_matrix(const DelaySystem& sys) {
    InteractionMatrix m = sys.matrix;
    if (sys.placement.kind == Placement::MixedSelf) m.a11 += sys.placement.a13;
    return m;
}

} // namespace delstab
