#include "qcrel/wall.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcrel::wall {

void WallGeometry::validate() const {
    if (!(h > 0.0) || !(t > 0.0) || !(e > 0.0))
        throw std::domain_error("wall geometry must be positive");
    if (!(r_e() < 0.5))
        throw std::domain_error("wall geometry: e/t must be below 0.5");
}

void MasonrySpec::validate() const {
    if (!(f_b > 0.0) || !(f_m > 0.0) || !(big_k > 0.0) || !(k_e > 0.0))
        throw std::domain_error("masonry spec must be positive");
    if (!(exp_alpha > 0.0 && exp_alpha <= 1.0) ||
        !(exp_beta >= 0.0 && exp_beta <= 1.0))
        throw std::domain_error("masonry exponents out of range");
}

double characteristic_strength(const MasonrySpec& spec) {
    spec.validate();
    return spec.big_k * std::pow(spec.f_b, spec.exp_alpha) *
           std::pow(spec.f_m, spec.exp_beta);
}

double slenderness(const WallGeometry& geom, const MasonrySpec& spec) {
    if (!(spec.k_e > 0.0)) throw std::domain_error("k_e must be positive");
    if (!(geom.t > 0.0)) throw std::domain_error("t must be positive");
    // f cancels through E = k_e * f
    return geom.r_h() / std::sqrt(spec.k_e);
}

double phi_reduction(double lambda, double r_e) {
    if (!(r_e >= 0.0 && r_e < 0.5))
        throw std::domain_error("phi_reduction: r_e must be in [0, 0.5)");
    if (lambda < 0.0)
        throw std::domain_error("phi_reduction: lambda must be >= 0");
    const double a = 1.0 - 2.0 * r_e;
    double phi;
    if (lambda < 1.14 * a)
        phi = a - lambda * lambda / (2.58 * a);
    else
        phi = 0.65 * a * a * a / (lambda * lambda);
    return std::clamp(phi, 0.0, 1.0);
}

double resistance_from_phi(double f_mpa, double phi, double t_m) {
    if (!(f_mpa > 0.0) || !(t_m > 0.0))
        throw std::domain_error("resistance: f and t must be > 0");
    if (!(phi >= 0.0 && phi <= 1.0))
        throw std::domain_error("resistance: phi must be in [0, 1]");
    return f_mpa * phi * t_m * 1000.0;  // MPa * m = 1000 kN/m
}

double resistance(const WallGeometry& geom, const MasonrySpec& spec,
                  double f_mpa, double r_e) {
    const double lambda = slenderness(geom, spec);
    return resistance_from_phi(f_mpa, phi_reduction(lambda, r_e), geom.t);
}

double homogeneity_eccentricity(double lambda, double r_e,
                                bool* second_branch) {
    if (!(r_e >= 0.0 && r_e < 0.5))
        throw std::domain_error("homogeneity: r_e must be in [0, 0.5)");
    const double a = 1.0 - 2.0 * r_e;
    const double a2 = 2.58 * a * a;
    const double l2 = lambda * lambda;
    if (lambda < 1.14 * a) {
        if (second_branch) *second_branch = false;
        if (a2 == l2)
            throw std::domain_error("homogeneity: 2.58 A^2 equals lambda^2");
        return (2.0 * r_e / a) * (a2 + l2) / (a2 - l2);
    }
    // Phi ~ A^3 on the second branch, so the magnitude is 3 * (2 r_e / A)
    if (second_branch) *second_branch = true;
    return 3.0 * (2.0 * r_e / a);
}

double homogeneity_numeric(const std::function<double(double)>& model,
                           double x_d, double rel_step) {
    if (!(rel_step > 0.0 && rel_step <= 0.1))
        throw std::domain_error("homogeneity_numeric: rel_step in (0, 0.1]");
    if (x_d == 0.0)
        throw std::domain_error("homogeneity_numeric: x_d must be nonzero");
    const double h = rel_step * std::abs(x_d);
    const double f0 = model(x_d);
    const double fp = model(x_d + h);
    const double fm = model(x_d - h);
    if (!std::isfinite(f0) || !std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("homogeneity_numeric: model not finite");
    if (f0 == 0.0)
        throw std::domain_error("homogeneity_numeric: model zero at x_d");
    return (fp - fm) / (2.0 * h) * (x_d / f0);
}

double resistance_log_sensitivity(const std::vector<NamedValue>& degrees,
                                  const std::vector<NamedValue>& deltas) {
    if (degrees.size() != deltas.size())
        throw std::domain_error("log sensitivity: name lists differ in size");
    double acc = 0.0;
    for (const auto& d : degrees) {
        bool found = false;
        for (const auto& l : deltas) {
            if (l.name == d.name) {
                acc += d.value * l.value;
                found = true;
                break;
            }
        }
        if (!found)
            throw std::domain_error("log sensitivity: no delta named '" +
                                    d.name + "'");
    }
    return acc;
}

}  // namespace qcrel::wall
