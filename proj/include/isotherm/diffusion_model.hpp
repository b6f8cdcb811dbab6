#pragma once

#include <json.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace isotherm {

/// phi with 0 < delta1 <= phi' <= delta2 and phi(0) = 0.
struct Nonlinearity {
    std::string label;
    nlohmann::json params = nlohmann::json::object();
    std::function<double(double)> phi;
    std::function<double(double)> phi_prime;
    double delta1 = 1.0;
    double delta2 = 1.0;

    bool is_identity() const { return label == "identity"; }

    static Nonlinearity identity();
    /// s + amplitude * sin(s); amplitude defaults to 0.1.
    static Nonlinearity wavy(double amplitude = 0.1);
    /// s + gain * atan(s); gain defaults to 0.2.
    static Nonlinearity saturating(double gain = 0.2);
    /// Built-in lookup by label with optional parameters.
    static Nonlinearity from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct NonlinearityValidation {
    bool passed = true;
    std::vector<double> violating_s;
    std::vector<std::string> messages;
};

/// Checks phi(0) = 0, the derivative bounds and phi' against a centered
/// difference of phi on sample_count uniform points of [-10, 10].
NonlinearityValidation validate_nonlinearity(const Nonlinearity& n, int sample_count = 2001);

/// Phi(s) = int_1^s phi'(xi)/xi dxi by adaptive Gauss-Kronrod on the
/// logarithmic variable; log s for the identity.
double pressure(const Nonlinearity& n, double s);

/// Derivative of Phi: phi'(s)/s.
inline double pressure_prime(const Nonlinearity& n, double s) { return n.phi_prime(s) / s; }

/// Phi tabulated on a uniform grid in log s with monotone cubic
/// interpolation; falls back to direct quadrature outside the table.
class PressureTable {
public:
    explicit PressureTable(Nonlinearity n, double log_min = -800.0, double log_max = 1.0, int nodes = 16385);

    double operator()(double s) const;
    const Nonlinearity& nonlinearity() const { return n_; }

private:
    Nonlinearity n_;
    double log_min_;
    double log_max_;
    double step_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

}  // namespace isotherm
