#pragma once

// =============================================================================
// Current distribution inside parallel groups and battery module state.
// =============================================================================

#include "mmspc/topology.hpp"

#include <cstddef>
#include <vector>

namespace mmspc {

/// Affine open-circuit voltage map v_min + soc * (v_max - v_min).
struct OcvMap {
    double v_min = 20.0;
    double v_max = 25.2;

    [[nodiscard]] double operator()(double soc) const { return v_min + soc * (v_max - v_min); }
};

[[nodiscard]] double ocv(double soc, const OcvMap& map = {});

struct BatteryModule {
    double soc = 0.5;
    double capacity_ah = 6.2;
    double r_b = 26.5e-3;
    double v_b = OcvMap{}(0.5);
};

[[nodiscard]] BatteryModule make_module(double soc, double capacity_ah, double r_b,
                                        const OcvMap& map = {});

/// Inter-module path resistances; entry j sits between module j and module j+1.
struct InterconnectResistances {
    std::vector<double> r_sh;
    std::vector<double> r_sl;

    [[nodiscard]] static InterconnectResistances uniform(int n, double r_sh, double r_sl);
};

/// Dense row-major n x n loop system; last row is the KCL row.
struct ImpedanceSystem {
    std::size_t n = 0;
    std::vector<double> matrix;
    std::vector<double> rhs;

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return matrix[r * n + c]; }
};

/// 1/k for each member of an active group of size k, 0 for bypassed modules.
[[nodiscard]] std::vector<double> ideal_share(const GroupLayout& layout);

/// Loop system for the group members [first, first + count): per-loop KVL between
/// neighbouring members with cumulative lower-triangular interconnect terms and a
/// final KCL row. i_l enters the low side of the first member and leaves the high
/// side of the last one.
[[nodiscard]] ImpedanceSystem assemble_system(std::size_t first, std::size_t count,
                                              const std::vector<BatteryModule>& modules,
                                              const InterconnectResistances& res, double i_l);

/// Gaussian elimination with partial pivoting.
[[nodiscard]] std::vector<double> solve_distribution(const ImpedanceSystem& system);

/// Node-voltage analysis of the same ladder network, used as an independent check.
[[nodiscard]] std::vector<double> nodal_oracle(std::size_t first, std::size_t count,
                                               const std::vector<BatteryModule>& modules,
                                               const InterconnectResistances& res, double i_l);

/// Battery current of every module for a string carrying i_l. Each active group sees
/// polarity * i_l; bypassed modules carry 0.
[[nodiscard]] std::vector<double> module_currents(const GroupLayout& layout,
                                                  const std::vector<BatteryModule>& modules,
                                                  const InterconnectResistances& res,
                                                  double i_l);

/// Coulomb counting, positive current discharges; soc clamped to [0, 1].
[[nodiscard]] BatteryModule step_battery(const BatteryModule& module, double i_b, double dt,
                                         const OcvMap& map = {});

}  // namespace mmspc
