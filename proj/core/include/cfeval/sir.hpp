#pragma once

#include <vector>

namespace cfeval::sir {

inline constexpr double kDefaultHorizonDays = 548.0;
inline constexpr double kDefaultStepDays = 0.25;

/// One parameterization of the heterogeneity-modified SIR system
///
///   dS/dt = -beta S I^alpha
///   dI/dt =  beta S I^alpha - I / infectious_period
///   dR/dt =  I / infectious_period
///
/// on a population normalized to one, with beta = r0 / infectious_period.
/// Vaccination of a fraction v happens before t = 0.
struct SirParams {
    double r0 = 2.5;
    double alpha = 1.0;
    double v = 0.0;
    double infectious_period = 10.0; // days
    double i0 = 0.001;

    double beta() const noexcept { return r0 / infectious_period; }
    double gamma() const noexcept { return 1.0 / infectious_period; }

    /// Throws DomainError unless r0 >= 0, alpha > 0, infectious_period > 0,
    /// 0 <= v < 1 and 0 < i0 < 1 - v.
    void validate() const;
};

struct SirTrajectory {
    std::vector<double> times;
    std::vector<double> s;
    std::vector<double> i;
    std::vector<double> r;
};

/// Fixed-step classical RK4 from S(0) = 1 - v, I(0) = i0, R(0) = v - i0.
/// The final step is shortened so the last sample lands on `horizon`.
SirTrajectory simulate(const SirParams &params, double horizon = kDefaultHorizonDays,
                       double step = kDefaultStepDays);

/// (S(0) - S(T)) / S(0) with T the horizon, i.e. the share of the
/// post-vaccination susceptible pool infected by the end of the run.
double final_size(const SirParams &params, double horizon = kDefaultHorizonDays,
                  double step = kDefaultStepDays);

/// Same quantity read off an existing trajectory.
double final_size(const SirTrajectory &trajectory);

} // namespace cfeval::sir
