#pragma once

// Transverse-field waveforms Omega(t) for the single-qubit Ising passage
//
//     H(t) = -1/2 [ Omega(t) sx + x sz ]        (hbar = 1, sz|1> = +|1>)
//
// together with its instantaneous eigensystem and the adiabatic parameter
// mu(t) = |x dOmega/dt| / (2 (Omega^2 + x^2)^{3/2}).
//
// Frequencies are measured in units of the final field Omega_f and times in
// units of 1/Omega_f throughout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qperceptron {

enum class ScheduleKind { Linear, Faquad, Perturbed, Tabulated };

struct SchedulePoint {
    double t;
    double omega;
};

/// Immutable description of a control waveform on [0, tf].
class ControlSchedule {
public:
    static ControlSchedule linear(double omega0, double omegaf, double tf);
    static ControlSchedule faquad(double omega0, double omegaf, double tf, double x_ref);
    /// Piecewise-linear waveform through the given samples (t strictly increasing, t_0 = 0).
    static ControlSchedule tabulated(std::vector<SchedulePoint> samples);
    /// Omega(t) = omega for all t in [0, tf]; a tabulated two-point schedule.
    static ControlSchedule constant(double omega, double tf);

    ScheduleKind kind() const { return kind_; }
    double omega0() const { return omega0_; }
    double omegaf() const { return omegaf_; }
    double tf() const { return tf_; }
    double x_ref() const { return x_ref_; }
    double epsilon_ctrl() const { return epsilon_; }
    const std::vector<SchedulePoint>& samples() const { return samples_; }
    bool is_time_reversed() const { return reversed_; }

    double omega(double t) const;
    double domega_dt(double t) const;

    /// Omega'(t) = -Omega(tf - t). Evolving with this waveform and field -x undoes the
    /// forward evolution with field x.
    ControlSchedule time_reversed() const;

    /// Omega'(t) = factor * Omega(t); factor = -1 gives the opposite-sign passage.
    ControlSchedule scaled(double factor) const;

    /// Constant-mu FAQUAD trace value mu = |v(Omega0) - v(Omega_f)| / (2 |x_ref| tf).
    double faquad_mu() const;

    std::vector<SchedulePoint> tabulate(std::size_t n_samples) const;

    friend ControlSchedule perturbed_schedule(const ControlSchedule& base, double epsilon_ctrl);

private:
    ControlSchedule() = default;

    double base_omega(double t) const;
    double base_domega_dt(double t) const;
    double tabulated_omega(double t) const;
    double tabulated_slope(double t) const;

    ScheduleKind kind_ = ScheduleKind::Linear;
    double omega0_ = 0;
    double omegaf_ = 0;
    double tf_ = 0;
    double x_ref_ = 0;
    double epsilon_ = 0;
    // FAQUAD parameterization: v = Omega / sqrt(Omega^2 + x_ref^2) is linear in t. We carry
    // d = 1 - v, which keeps 1 - v^2 = d (2 - d) accurate when Omega0 >> |x_ref|.
    double d0_ = 0;
    double df_ = 0;
    std::vector<SchedulePoint> samples_;
    bool reversed_ = false;
    double factor_ = 1.0;
};

/// Mixing angle, energies and eigenvectors of H for fixed (Omega, x).
struct EigenSystem {
    struct Spinor {
        double resting;  // amplitude on |0>
        double active;   // amplitude on |1>
    };
    double theta_bloch;
    double e0;
    double e1;
    Spinor phi0;  // ground state
    Spinor phi1;  // excited state

    double gap() const { return e1 - e0; }
};

inline ControlSchedule ControlSchedule::linear(double omega0, double omegaf, double tf)
{
    if (!(omegaf > 0) || !(omega0 > omegaf)) {
        throw std::invalid_argument("linear schedule requires omega0 > omegaf > 0");
    }
    if (!(tf > 0) || !std::isfinite(tf)) {
        throw std::invalid_argument("schedule duration must be positive");
    }
    ControlSchedule s;
    s.kind_ = ScheduleKind::Linear;
    s.omega0_ = omega0;
    s.omegaf_ = omegaf;
    s.tf_ = tf;
    return s;
}

inline ControlSchedule ControlSchedule::faquad(double omega0, double omegaf, double tf, double x_ref)
{
    if (!(omegaf > 0) || !(omega0 > omegaf)) {
        throw std::invalid_argument("faquad schedule requires omega0 > omegaf > 0");
    }
    if (!(tf > 0) || !std::isfinite(tf)) {
        throw std::invalid_argument("schedule duration must be positive");
    }
    if (x_ref == 0 || !std::isfinite(x_ref)) {
        throw std::invalid_argument("faquad design field must be nonzero: without it there is no avoided crossing");
    }
    ControlSchedule s;
    s.kind_ = ScheduleKind::Faquad;
    s.omega0_ = omega0;
    s.omegaf_ = omegaf;
    s.tf_ = tf;
    s.x_ref_ = x_ref;
    // 1 - Omega/r = x^2 / (r (r + Omega))
    auto one_minus_v = [x = std::abs(x_ref)](double om) {
        const double r = std::hypot(om, x);
        return x * x / (r * (r + om));
    };
    s.d0_ = one_minus_v(omega0);
    s.df_ = one_minus_v(omegaf);
    return s;
}

inline ControlSchedule ControlSchedule::tabulated(std::vector<SchedulePoint> samples)
{
    if (samples.size() < 2) {
        throw std::invalid_argument("tabulated schedule needs at least two samples");
    }
    if (samples.front().t != 0) {
        throw std::invalid_argument("tabulated schedule must start at t = 0");
    }
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].t > samples[i - 1].t)) {
            throw std::invalid_argument("tabulated schedule times must be strictly increasing");
        }
    }
    for (const auto& p : samples) {
        if (!std::isfinite(p.omega) || !std::isfinite(p.t)) {
            throw std::invalid_argument("tabulated schedule contains non-finite values");
        }
    }
    ControlSchedule s;
    s.kind_ = ScheduleKind::Tabulated;
    s.omega0_ = samples.front().omega;
    s.omegaf_ = samples.back().omega;
    s.tf_ = samples.back().t;
    s.samples_ = std::move(samples);
    return s;
}

inline ControlSchedule ControlSchedule::constant(double omega, double tf)
{
    if (!(tf > 0)) {
        throw std::invalid_argument("schedule duration must be positive");
    }
    return tabulated({{0.0, omega}, {tf, omega}});
}

inline double ControlSchedule::tabulated_omega(double t) const
{
    const auto& p = samples_;
    if (t <= p.front().t) {
        return p.front().omega;
    }
    if (t >= p.back().t) {
        return p.back().omega;
    }
    auto it = std::upper_bound(p.begin(), p.end(), t, [](double v, const SchedulePoint& q) { return v < q.t; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double w = (t - a.t) / (b.t - a.t);
    return a.omega + w * (b.omega - a.omega);
}

// Central differences at the stored nodes, interpolated linearly in between.
inline double ControlSchedule::tabulated_slope(double t) const
{
    const auto& p = samples_;
    const std::size_t n = p.size();
    auto node_slope = [&](std::size_t i) {
        if (i == 0) {
            return (p[1].omega - p[0].omega) / (p[1].t - p[0].t);
        }
        if (i == n - 1) {
            return (p[n - 1].omega - p[n - 2].omega) / (p[n - 1].t - p[n - 2].t);
        }
        return (p[i + 1].omega - p[i - 1].omega) / (p[i + 1].t - p[i - 1].t);
    };
    if (t <= p.front().t) {
        return node_slope(0);
    }
    if (t >= p.back().t) {
        return node_slope(n - 1);
    }
    auto it = std::upper_bound(p.begin(), p.end(), t, [](double v, const SchedulePoint& q) { return v < q.t; });
    const std::size_t j = static_cast<std::size_t>(it - p.begin());
    const double w = (t - p[j - 1].t) / (p[j].t - p[j - 1].t);
    return (1 - w) * node_slope(j - 1) + w * node_slope(j);
}

inline double ControlSchedule::base_omega(double t) const
{
    switch (kind_) {
    case ScheduleKind::Linear:
    case ScheduleKind::Perturbed:
    case ScheduleKind::Faquad: {
        const double s = std::clamp(t / tf_, 0.0, 1.0);
        double om = 0;
        if (kind_ == ScheduleKind::Linear) {
            om = omega0_ * (1 - s) + omegaf_ * s;
        } else {
            const double d = (1 - s) * d0_ + s * df_;
            om = std::abs(x_ref_) * (1 - d) / std::sqrt(d * (2 - d));
        }
        if (kind_ == ScheduleKind::Perturbed) {
            om += epsilon_ * (omega0_ + (omegaf_ - omega0_) * s);
        }
        return om;
    }
    case ScheduleKind::Tabulated:
        return tabulated_omega(t);
    }
    throw std::logic_error("unknown schedule kind");
}

inline double ControlSchedule::base_domega_dt(double t) const
{
    switch (kind_) {
    case ScheduleKind::Linear:
        return (omegaf_ - omega0_) / tf_;
    case ScheduleKind::Faquad:
    case ScheduleKind::Perturbed: {
        const double s = std::clamp(t / tf_, 0.0, 1.0);
        const double d = (1 - s) * d0_ + s * df_;
        const double w2 = d * (2 - d);  // 1 - v^2
        // dOmega/dv = |x| (1 - v^2)^{-3/2},  dv/dt = (v_f - v_0) / tf = (d0 - df) / tf
        double rate = std::abs(x_ref_) / (w2 * std::sqrt(w2)) * (d0_ - df_) / tf_;
        if (kind_ == ScheduleKind::Perturbed) {
            rate += epsilon_ * (omegaf_ - omega0_) / tf_;
        }
        return rate;
    }
    case ScheduleKind::Tabulated:
        return tabulated_slope(t);
    }
    throw std::logic_error("unknown schedule kind");
}

inline double ControlSchedule::omega(double t) const
{
    return factor_ * base_omega(reversed_ ? tf_ - t : t);
}

inline double ControlSchedule::domega_dt(double t) const
{
    const double d = base_domega_dt(reversed_ ? tf_ - t : t);
    return factor_ * (reversed_ ? -d : d);
}

inline ControlSchedule ControlSchedule::time_reversed() const
{
    ControlSchedule s = *this;
    s.reversed_ = !reversed_;
    s.factor_ = -factor_;
    return s;
}

inline ControlSchedule ControlSchedule::scaled(double factor) const
{
    ControlSchedule s = *this;
    s.factor_ *= factor;
    return s;
}

inline double ControlSchedule::faquad_mu() const
{
    if (kind_ != ScheduleKind::Faquad) {
        throw std::logic_error("faquad_mu is defined for FAQUAD schedules only");
    }
    return std::abs(d0_ - df_) / (2 * std::abs(x_ref_) * tf_);
}

inline std::vector<SchedulePoint> ControlSchedule::tabulate(std::size_t n_samples) const
{
    if (n_samples < 2) {
        throw std::invalid_argument("need at least two samples");
    }
    std::vector<SchedulePoint> out;
    out.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = (i + 1 == n_samples) ? tf_ : tf_ * static_cast<double>(i) / static_cast<double>(n_samples - 1);
        out.push_back({t, omega(t)});
    }
    return out;
}

inline ControlSchedule linear_schedule(double omega0, double omegaf, double tf)
{
    return ControlSchedule::linear(omega0, omegaf, tf);
}

inline ControlSchedule faquad_schedule(double omega0, double omegaf, double tf, double x_ref)
{
    return ControlSchedule::faquad(omega0, omegaf, tf, x_ref);
}

/// FAQUAD waveform with a superimposed linear error eps [Omega0 + (Omega_f - Omega0) t / tf].
/// The endpoints move to (1 + eps) Omega0 and (1 + eps) Omega_f.
inline ControlSchedule perturbed_schedule(const ControlSchedule& base, double epsilon_ctrl)
{
    if (base.kind() != ScheduleKind::Faquad || base.reversed_ || base.factor_ != 1.0) {
        throw std::invalid_argument("perturbed schedule requires a plain FAQUAD base");
    }
    if (!(epsilon_ctrl >= 0) || !std::isfinite(epsilon_ctrl)) {
        throw std::invalid_argument("control degradation must be a finite nonnegative number");
    }
    ControlSchedule s = base;
    s.kind_ = ScheduleKind::Perturbed;
    s.epsilon_ = epsilon_ctrl;
    return s;
}

/// Instantaneous eigensystem of H for (Omega, x). The ground state tends to the active
/// state |1> for x -> +inf and to |+> for x = 0, Omega > 0.
inline EigenSystem eigensystem(double omega, double x)
{
    if (omega == 0 && x == 0) {
        throw std::invalid_argument("eigensystem is degenerate at Omega = x = 0");
    }
    const double r = std::hypot(omega, x);
    const double theta = std::acos(std::clamp(-x / r, -1.0, 1.0));
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    const double sign = omega < 0 ? -1.0 : 1.0;
    EigenSystem e{};
    e.theta_bloch = theta;
    e.e0 = -r / 2;
    e.e1 = r / 2;
    e.phi0 = {c, sign * s};
    e.phi1 = {-sign * s, c};
    return e;
}

/// mu = |x dOmega/dt| / (2 (Omega^2 + x^2)^{3/2}).
inline double adiabatic_mu(const ControlSchedule& schedule, double x, double t)
{
    if (x == 0) {
        return 0.0;
    }
    const double om = schedule.omega(t);
    const double r2 = om * om + x * x;
    return std::abs(x * schedule.domega_dt(t)) / (2 * r2 * std::sqrt(r2));
}

/// Constant adiabatic parameter of the FAQUAD passage designed for field x, up to the 1/tf
/// factor: |v(Omega0) - v(Omega_f)| / (2 |x|) with v(W) = 1 / sqrt(1 + x^2 / W^2).
/// omega0 = +inf is the Omega0 >> Omega_f limit.
inline double faquad_mu_profile(double x, double omega0, double omegaf)
{
    const double ax = std::abs(x);
    if (ax == 0) {
        return 0.0;
    }
    auto v = [ax](double w) { return std::isinf(w) ? 1.0 : 1.0 / std::hypot(1.0, ax / w); };
    return std::abs(v(omega0) - v(omegaf)) / (2 * ax);
}

/// Design field that maximizes the FAQUAD adiabatic parameter over x at fixed endpoints.
/// Found by golden-section search; for omega0 -> inf it approaches sqrt(golden ratio) omegaf.
inline double optimal_design_field(double omegaf, double omega0 = std::numeric_limits<double>::infinity())
{
    if (!(omegaf > 0) || !(omega0 > omegaf)) {
        throw std::invalid_argument("optimal_design_field requires omega0 > omegaf > 0");
    }
    // Search in y = x / omegaf on a log scale; the profile is unimodal in y > 0.
    const double ratio = omega0 / omegaf;
    auto objective = [&](double log_y) { return faquad_mu_profile(std::exp(log_y), ratio, 1.0); };
    double a = std::log(1e-3);
    double b = std::log(std::min(1e3, std::sqrt(ratio)));
    const double inv_phi = (std::sqrt(5.0) - 1) / 2;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    return std::exp(0.5 * (a + b)) * omegaf;
}

/// CSV export: header `t,omega`, rows by increasing t.
inline void write_schedule_csv(std::ostream& out, const ControlSchedule& schedule, std::size_t n_samples)
{
    const auto old_precision = out.precision(17);
    out << "t,omega\n";
    for (const auto& p : schedule.tabulate(n_samples)) {
        out << p.t << ',' << p.omega << '\n';
    }
    out.precision(old_precision);
}

}  // namespace qperceptron
