#pragma once

// Uniform grids in time and space shared by all modules.

#include <stdexcept>

namespace fnld {

// Nodes t_i = i*T/n, i = 0..n. Cell j is the interval (t_j, t_{j+1}].
struct TimeGrid {
  double T = 1.0;
  int n = 1;

  TimeGrid() = default;
  TimeGrid(double T_, int n_) : T(T_), n(n_) {
    if (!(T > 0.0)) throw std::domain_error("TimeGrid: horizon must be positive");
    if (n < 1) throw std::domain_error("TimeGrid: need at least one step");
  }
  double tau() const { return T / n; }
  double node(int i) const { return T * i / n; }
};

// Interior nodes of (a, b): x_i = a + (i+1)h, i = 0..N-1, h = (b-a)/(N+1).
// Functions are represented by their interior nodal values; the zero
// exterior condition is built into every operator that uses this grid.
struct SpaceGrid1D {
  double a = -1.0;
  double b = 1.0;
  int N = 1;

  SpaceGrid1D() = default;
  SpaceGrid1D(double a_, double b_, int N_) : a(a_), b(b_), N(N_) {
    if (!(a < b)) throw std::domain_error("SpaceGrid1D: empty interval");
    if (N < 1) throw std::domain_error("SpaceGrid1D: need at least one node");
  }
  double h() const { return (b - a) / (N + 1); }
  double node(int i) const { return a + (b - a) * (i + 1) / (N + 1); }
};

}  // namespace fnld
