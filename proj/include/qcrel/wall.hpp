#pragma once
// Vertically loaded masonry wall resistance model: power-law strength,
// slenderness, capacity reduction factor and homogeneity degrees.
//
// Units are fixed project-wide: strengths in MPa, lengths in m, resistance
// in kN/m (1 MPa * 1 m = 1000 kN/m). Conversions belong at I/O boundaries.

#include <functional>
#include <string>
#include <vector>

namespace qcrel::wall {

struct WallGeometry {
    double h = 0.0;  // wall height, m
    double t = 0.0;  // wall thickness, m
    double e = 0.0;  // mid-height eccentricity, m

    double r_h() const { return h / t; }
    double r_e() const { return e / t; }
    void validate() const;  // throws std::domain_error (needs r_e < 0.5)
};

struct MasonrySpec {
    double f_b = 0.0;       // unit strength, MPa
    double f_m = 0.0;       // mortar strength, MPa
    double big_k = 0.0;     // K of the power law
    double exp_alpha = 0.0; // unit-strength exponent
    double exp_beta = 0.0;  // mortar-strength exponent
    double k_e = 0.0;       // modulus ratio, E = k_e * f

    void validate() const;
};

// f_k = K * f_b^alpha * f_m^beta, MPa
double characteristic_strength(const MasonrySpec& spec);

// lambda = (h/t) sqrt(f/E); with E = k_e * f this reduces to r_h/sqrt(k_e).
double slenderness(const WallGeometry& geom, const MasonrySpec& spec);

// Capacity reduction factor, A = 1 - 2 r_e:
//   Phi = A - lambda^2/(2.58 A)   for lambda <  1.14 A
//   Phi = 0.65 A^3 / lambda^2     for lambda >= 1.14 A
// clamped to [0, 1]. Throws for r_e >= 0.5.
double phi_reduction(double lambda, double r_e);

// R = f * Phi * t in kN/m (f in MPa, t in m).
double resistance_from_phi(double f_mpa, double phi, double t_m);

// Full composition: Phi from the wall's slenderness and the given r_e.
double resistance(const WallGeometry& geom, const MasonrySpec& spec,
                  double f_mpa, double r_e);

// Eccentricity homogeneity degree, reported as a positive magnitude (the
// underlying dPhi/dr_e is negative). Uses the closed form of the active
// Phi branch; `second_branch` reports which one was used.
double homogeneity_eccentricity(double lambda, double r_e,
                                bool* second_branch = nullptr);

// Central-difference log-elasticity (x/f)(df/dx) at x_d.
double homogeneity_numeric(const std::function<double(double)>& model,
                           double x_d, double rel_step);

struct NamedValue {
    std::string name;
    double value = 0.0;
};

// Weighted sum of log-relative changes: sum_i n_i * L_i. Names must match
// one-to-one.
double resistance_log_sensitivity(const std::vector<NamedValue>& degrees,
                                  const std::vector<NamedValue>& deltas);

}  // namespace qcrel::wall
