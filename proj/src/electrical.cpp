#include "mmspc/electrical.hpp"
#include "mmspc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmspc {

double ocv(double soc, const OcvMap& map) { return map(soc); }

BatteryModule make_module(double soc, double capacity_ah, double r_b, const OcvMap& map) {
    if (capacity_ah <= 0.0 || r_b <= 0.0) {
        throw std::invalid_argument("battery capacity and resistance must be positive");
    }
    BatteryModule m;
    m.soc = std::clamp(soc, 0.0, 1.0);
    m.capacity_ah = capacity_ah;
    m.r_b = r_b;
    m.v_b = map(m.soc);
    return m;
}

InterconnectResistances InterconnectResistances::uniform(int n, double r_sh, double r_sl) {
    const auto links = static_cast<std::size_t>(std::max(n - 1, 0));
    return {std::vector<double>(links, r_sh), std::vector<double>(links, r_sl)};
}

std::vector<double> ideal_share(const GroupLayout& layout) {
    std::size_t n = 0;
    for (const auto& g : layout.groups) {
        n = std::max(n, g.last + 1);
    }
    std::vector<double> share(n, 0.0);
    for (const auto& g : layout.groups) {
        if (g.polarity == 0) {
            continue;
        }
        const double s = 1.0 / static_cast<double>(g.size());
        for (std::size_t i = g.first; i <= g.last; ++i) {
            share[i] = s;
        }
    }
    return share;
}

// =============================================================================
// Loop formulation
// =============================================================================

namespace {

void check_group(std::size_t first, std::size_t count, const std::vector<BatteryModule>& modules,
                 const InterconnectResistances& res) {
    if (count == 0 || first + count > modules.size()) {
        throw std::invalid_argument("group outside module range");
    }
    if (count > 1 && (first + count - 1 > res.r_sh.size() || first + count - 1 > res.r_sl.size())) {
        throw std::invalid_argument("missing interconnect resistances for group");
    }
}

}  // namespace

ImpedanceSystem assemble_system(std::size_t first, std::size_t count,
                                const std::vector<BatteryModule>& modules,
                                const InterconnectResistances& res, double i_l) {
    check_group(first, count, modules, res);
    ImpedanceSystem sys;
    sys.n = count;
    sys.matrix.assign(count * count, 0.0);
    sys.rhs.assign(count, 0.0);
    auto a = [&](std::size_t r, std::size_t c) -> double& { return sys.matrix[r * count + c]; };

    for (std::size_t j = 0; j + 1 < count; ++j) {
        const auto& mj = modules[first + j];
        const auto& mk = modules[first + j + 1];
        const double r_sh = res.r_sh[first + j];
        const double r_sl = res.r_sl[first + j];
        const double r_l = -(r_sh + r_sl);
        for (std::size_t c = 0; c < j; ++c) {
            a(j, c) = r_l;
        }
        a(j, j) = -(mj.r_b + r_sl + r_sh);
        a(j, j + 1) = mk.r_b;
        sys.rhs[j] = mk.v_b - mj.v_b - r_sl * i_l;
    }
    for (std::size_t c = 0; c < count; ++c) {
        a(count - 1, c) = 1.0;
    }
    sys.rhs[count - 1] = i_l;
    return sys;
}

std::vector<double> solve_distribution(const ImpedanceSystem& system) {
    const std::size_t n = system.n;
    std::vector<double> a = system.matrix;
    std::vector<double> b = system.rhs;
    if (a.size() != n * n || b.size() != n) {
        throw std::invalid_argument("malformed impedance system");
    }
    double scale = 0.0;
    for (double v : a) {
        scale = std::max(scale, std::abs(v));
    }
    const double tiny = 1e-14 * std::max(scale, 1e-300);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(a[r * n + k]) > std::abs(a[piv * n + k])) {
                piv = r;
            }
        }
        if (std::abs(a[piv * n + k]) <= tiny) {
            throw SingularMatrixError("singular group system at column " + std::to_string(k));
        }
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[k * n + c], a[piv * n + c]);
            }
            std::swap(b[k], b[piv]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = a[r * n + k] / a[k * n + k];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = k; c < n; ++c) {
                a[r * n + c] -= f * a[k * n + c];
            }
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t c = k + 1; c < n; ++c) {
            s -= a[k * n + c] * x[c];
        }
        x[k] = s / a[k * n + k];
    }
    return x;
}

// =============================================================================
// Nodal formulation
// =============================================================================

std::vector<double> nodal_oracle(std::size_t first, std::size_t count,
                                 const std::vector<BatteryModule>& modules,
                                 const InterconnectResistances& res, double i_l) {
    check_group(first, count, modules, res);
    // Nodes: high rail H_0..H_{n-1}, low rail L_0..L_{n-1}; L_0 is ground.
    // Unknown vector: [H_0..H_{n-1}, L_1..L_{n-1}].
    const auto n = static_cast<Eigen::Index>(count);
    const Eigen::Index dim = 2 * n - 1;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(dim);
    auto hi = [](Eigen::Index j) { return j; };
    auto lo = [n](Eigen::Index j) { return j == 0 ? Eigen::Index{-1} : n + j - 1; };

    auto stamp = [&](Eigen::Index p, Eigen::Index q, double cond) {
        if (p >= 0) g(p, p) += cond;
        if (q >= 0) g(q, q) += cond;
        if (p >= 0 && q >= 0) {
            g(p, q) -= cond;
            g(q, p) -= cond;
        }
    };

    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& m = modules[first + static_cast<std::size_t>(j)];
        // Norton battery branch: conductance 1/r_b, source v_b/r_b pushed into H_j.
        stamp(hi(j), lo(j), 1.0 / m.r_b);
        const double src = m.v_b / m.r_b;
        inj(hi(j)) += src;
        if (lo(j) >= 0) inj(lo(j)) -= src;
    }
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const auto k = first + static_cast<std::size_t>(j);
        stamp(hi(j), hi(j + 1), 1.0 / res.r_sh[k]);
        stamp(lo(j), lo(j + 1), 1.0 / res.r_sl[k]);
    }
    // External load draws i_l out of H_{n-1} and returns it into L_0 (ground).
    inj(hi(n - 1)) -= i_l;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    if (!lu.isInvertible()) {
        throw SingularMatrixError("singular nodal network");
    }
    const Eigen::VectorXd v = lu.solve(inj);

    std::vector<double> i_b(count);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& m = modules[first + static_cast<std::size_t>(j)];
        const double vh = v(hi(j));
        const double vl = lo(j) >= 0 ? v(lo(j)) : 0.0;
        i_b[static_cast<std::size_t>(j)] = (m.v_b - (vh - vl)) / m.r_b;
    }
    return i_b;
}

// =============================================================================
// String level
// =============================================================================

std::vector<double> module_currents(const GroupLayout& layout,
                                    const std::vector<BatteryModule>& modules,
                                    const InterconnectResistances& res, double i_l) {
    std::vector<double> out(modules.size(), 0.0);
    for (const auto& g : layout.groups) {
        if (g.polarity == 0) {
            continue;
        }
        const double i_group = g.polarity * i_l;
        if (g.size() == 1) {
            out[g.first] = i_group;
            continue;
        }
        const auto x = solve_distribution(assemble_system(g.first, g.size(), modules, res, i_group));
        std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(g.first));
    }
    return out;
}

BatteryModule step_battery(const BatteryModule& module, double i_b, double dt, const OcvMap& map) {
    if (dt <= 0.0) {
        throw std::invalid_argument("dt must be positive");
    }
    BatteryModule m = module;
    m.soc = std::clamp(m.soc - i_b * dt / (3600.0 * m.capacity_ah), 0.0, 1.0);
    m.v_b = map(m.soc);
    return m;
}

}  // namespace mmspc
