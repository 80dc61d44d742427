#include "cfeval/sir.hpp"

#include "cfeval/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace cfeval::sir {

namespace {

struct State {
    double s;
    double i;
    double r;
};

State operator+(const State &a, const State &b) { return {a.s + b.s, a.i + b.i, a.r + b.r}; }
State operator*(double k, const State &a) { return {k * a.s, k * a.i, k * a.r}; }

class Rhs {
  public:
    explicit Rhs(const SirParams &p) : beta_{p.beta()}, gamma_{p.gamma()}, alpha_{p.alpha} {}

    State operator()(const State &x) const {
        // 0^alpha = 0; negative stage values of I are treated the same way.
        const double pressure = x.i > 0.0 ? std::pow(x.i, alpha_) : 0.0;
        const double infection = beta_ * x.s * pressure;
        const double recovery = gamma_ * x.i;
        return {-infection, infection - recovery, recovery};
    }

  private:
    double beta_;
    double gamma_;
    double alpha_;
};

State rk4_step(const Rhs &f, const State &x, double h) {
    const State k1 = f(x);
    const State k2 = f(x + (0.5 * h) * k1);
    const State k3 = f(x + (0.5 * h) * k2);
    const State k4 = f(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_grid(double horizon, double step) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("horizon must be positive and finite, got " + std::to_string(horizon));
    }
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw DomainError("step must be positive and finite, got " + std::to_string(step));
    }
}

std::size_t step_count(double horizon, double step) {
    // Tolerate horizon/step landing a hair above an integer.
    return static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
}

/// Drives the integrator and hands every accepted state to `visit`.
template <typename Visit>
State integrate(const SirParams &params, double horizon, double step, Visit &&visit) {
    params.validate();
    check_grid(horizon, step);

    const Rhs f{params};
    State x{1.0 - params.v, params.i0, params.v - params.i0};
    visit(0.0, x);

    const std::size_t n = step_count(horizon, step);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * step;
        const double h = std::min(step, horizon - t);
        x = rk4_step(f, x, h);
        if (!std::isfinite(x.s) || !std::isfinite(x.i) || !std::isfinite(x.r)) {
            throw NumericalError("non-finite SIR state at t=" + std::to_string(t + h) +
                                 " (r0=" + std::to_string(params.r0) +
                                 ", alpha=" + std::to_string(params.alpha) + ")");
        }
        visit(k + 1 == n ? horizon : t + h, x);
    }
    return x;
}

double relative_final_size(double s0, double s_end) {
    return std::clamp((s0 - s_end) / s0, 0.0, 1.0);
}

} // namespace

void SirParams::validate() const {
    auto fail = [](const std::string &what) { throw DomainError("invalid SIR parameters: " + what); };
    // r0 == 0 is admitted as the no-transmission limit.
    if (!(r0 >= 0.0) || !std::isfinite(r0)) fail("r0 must be >= 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
    if (!(infectious_period > 0.0) || !std::isfinite(infectious_period)) {
        fail("infectious_period must be > 0");
    }
    if (!(v >= 0.0 && v < 1.0)) fail("v must lie in [0, 1)");
    if (!(i0 > 0.0 && i0 < 1.0 - v)) fail("i0 must lie in (0, 1 - v)");
}

SirTrajectory simulate(const SirParams &params, double horizon, double step) {
    SirTrajectory out;
    if (horizon > 0.0 && step > 0.0 && std::isfinite(horizon / step)) {
        const std::size_t n = step_count(horizon, step) + 1;
        out.times.reserve(n);
        out.s.reserve(n);
        out.i.reserve(n);
        out.r.reserve(n);
    }
    integrate(params, horizon, step, [&out](double t, const State &x) {
        out.times.push_back(t);
        out.s.push_back(x.s);
        out.i.push_back(x.i);
        out.r.push_back(x.r);
    });
    return out;
}

double final_size(const SirParams &params, double horizon, double step) {
    const State end = integrate(params, horizon, step, [](double, const State &) {});
    return relative_final_size(1.0 - params.v, end.s);
}

double final_size(const SirTrajectory &trajectory) {
    if (trajectory.s.empty()) {
        throw StructuralError("final_size: empty trajectory");
    }
    return relative_final_size(trajectory.s.front(), trajectory.s.back());
}

} // namespace cfeval::sir
