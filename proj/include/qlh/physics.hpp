#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "qlh/field.hpp"
#include "qlh/spectral.hpp"

namespace qlh {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when an evolution blows up; carries the offending time.
struct NumericalAbort : std::runtime_error {
    double time;
    NumericalAbort(const std::string& what, double t)
        : std::runtime_error(what + " at t = " + std::to_string(t)), time(t) {}
};

struct PhysicsParams {
    double hbar = 1.0;
    double mass = 1.0;
    double coupling = 0.0;  // g, any sign
    double charge = 0.0;    // q, fixed at 0 in v1

    void validate() const {
        if (!(hbar > 0.0)) throw ConfigError("physics: hbar must be positive");
        if (!(mass > 0.0)) throw ConfigError("physics: mass must be positive");
        if (charge != 0.0) throw ConfigError("physics: charge must be 0 (no gauged evolution equation)");
    }
};

/// Vector-potential coupling slot. The evolved equation has no gauge term,
/// so only A = 0, q = 0 configurations are accepted.
struct GaugeConfig {
    std::optional<VectorField> vector_potential;
    double charge = 0.0;

    void validate() const {
        if (vector_potential.has_value() || charge != 0.0)
            throw ConfigError("gauge: only A = 0, q = 0 is supported");
    }
};

enum class PotentialKind { none, harmonic, tabulated };
enum class PotentialTime { static_, sine };

/// External potential V(r,t). Harmonic potentials carry analytic gradients;
/// tabulated ones must be periodic-compatible and are differentiated
/// spectrally. Time dependence is a scripted scale factor
/// s(t) = 1 + amp*sin(omega_t * t) applied uniformly.
class PotentialSpec {
public:
    PotentialSpec() = default;

    static PotentialSpec none() { return PotentialSpec(); }

    static PotentialSpec harmonic(const std::array<double, 3>& omega,
                                  const std::array<double, 3>& center = {0, 0, 0}) {
        PotentialSpec p;
        p.kind_ = PotentialKind::harmonic;
        p.omega_ = omega;
        p.center_ = center;
        return p;
    }

    static PotentialSpec tabulated(RealField table) {
        if (!table.all_finite()) throw ConfigError("potential: tabulated values must be finite");
        PotentialSpec p;
        p.kind_ = PotentialKind::tabulated;
        p.table_ = std::move(table);
        return p;
    }

    PotentialKind kind() const { return kind_; }
    bool is_none() const { return kind_ == PotentialKind::none; }

    void set_time_dependence(double amp, double omega_t) {
        time_ = PotentialTime::sine;
        sine_amp_ = amp;
        sine_omega_ = omega_t;
    }
    bool is_static() const { return time_ == PotentialTime::static_; }

    double scale(double t) const {
        return time_ == PotentialTime::static_ ? 1.0 : 1.0 + sine_amp_ * std::sin(sine_omega_ * t);
    }

    /// V at t = 0 scale 1 sampled on the grid.
    RealField sample(const GridSpec& g, double mass) const {
        switch (kind_) {
            case PotentialKind::none:
                return RealField(g, 0.0);
            case PotentialKind::harmonic: {
                RealField v(g);
                v.fill_from([&](double x, double y, double z) {
                    const double c[3] = {x - center_[0], y - center_[1], z - center_[2]};
                    double s = 0.0;
                    for (int a = 0; a < g.dim(); ++a) s += omega_[a] * omega_[a] * c[a] * c[a];
                    return 0.5 * mass * s;
                });
                return v;
            }
            case PotentialKind::tabulated:
                if (!table_.grid().same_layout(g))
                    throw ConfigError("potential: tabulated grid does not match trajectory grid");
                return table_;
        }
        return RealField(g, 0.0);
    }

    /// grad V (unit scale). Analytic for harmonic; spectral for tabulated
    /// (tables are assumed periodic-smooth); zero otherwise.
    VectorField sample_gradient(const GridSpec& g, double mass) const {
        VectorField dv(g);
        switch (kind_) {
            case PotentialKind::none:
                return dv;
            case PotentialKind::harmonic:
                for (int a = 0; a < g.dim(); ++a) {
                    dv.comp(a).fill_from([&](double x, double y, double z) {
                        const double c[3] = {x, y, z};
                        return mass * omega_[a] * omega_[a] * (c[a] - center_[a]);
                    });
                }
                return dv;
            case PotentialKind::tabulated:
                return spectral_gradient_all(sample(g, mass));
        }
        return dv;
    }

    double omega(int axis) const { return omega_[axis]; }
    double center(int axis) const { return center_[axis]; }

private:
    PotentialKind kind_ = PotentialKind::none;
    PotentialTime time_ = PotentialTime::static_;
    std::array<double, 3> omega_{0, 0, 0};
    std::array<double, 3> center_{0, 0, 0};
    double sine_amp_ = 0.0;
    double sine_omega_ = 0.0;
    RealField table_;
};

}  // namespace qlh
