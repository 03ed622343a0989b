#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "linctl/numkernel.hpp"
#include "linctl/systems.hpp"

namespace linctl {

/// Duhamel simulation of x' = Ax + Bu from x(grid[0]) = x0. The state is
/// advanced by RK4 between consecutive grid points with sub-steps no longer
/// than cfg.ode_step; states[0] == x0 exactly and controls are sampled on
/// the grid.
Trajectory simulate(const LtiSystem& sys, const Vector& x0, const ControlSignal& u,
                    std::span<const double> grid, const ToleranceConfig& cfg = {});

/// Time-varying counterpart; the grid must lie inside the system interval.
Trajectory simulate(const LtvSystem& sys, const Vector& x0, const ControlSignal& u,
                    std::span<const double> grid, const ToleranceConfig& cfg = {});

/// CSV with header `t,x1,...,xn[,u1,...,up]`, 17 significant digits, LF.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// printf-style %.17g.
std::string format_double(double value);

}  // namespace linctl
