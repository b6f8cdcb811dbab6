#include "isotherm/diffusion_model.hpp"

#include "isotherm/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isotherm {

Nonlinearity Nonlinearity::identity()
{
    Nonlinearity n;
    n.label = "identity";
    n.phi = [](double s) { return s; };
    n.phi_prime = [](double) { return 1.0; };
    n.delta1 = 1.0;
    n.delta2 = 1.0;
    return n;
}

Nonlinearity Nonlinearity::wavy(double amplitude)
{
    if (!(std::abs(amplitude) < 1.0)) fail(ErrorKind::configuration, "wavy amplitude must satisfy |a| < 1");
    Nonlinearity n;
    n.label = "wavy";
    n.params = {{"amplitude", amplitude}};
    n.phi = [amplitude](double s) { return s + amplitude * std::sin(s); };
    n.phi_prime = [amplitude](double s) { return 1.0 + amplitude * std::cos(s); };
    n.delta1 = 1.0 - std::abs(amplitude);
    n.delta2 = 1.0 + std::abs(amplitude);
    return n;
}

Nonlinearity Nonlinearity::saturating(double gain)
{
    if (!(gain >= 0.0)) fail(ErrorKind::configuration, "saturating gain must be >= 0");
    Nonlinearity n;
    n.label = "saturating";
    n.params = {{"gain", gain}};
    n.phi = [gain](double s) { return s + gain * std::atan(s); };
    n.phi_prime = [gain](double s) { return 1.0 + gain / (1.0 + s * s); };
    n.delta1 = 1.0;
    n.delta2 = 1.0 + gain;
    return n;
}

Nonlinearity Nonlinearity::from_json(const nlohmann::json& j)
{
    if (!j.is_object()) fail(ErrorKind::schema, "nonlinearity must be an object");
    if (!j.contains("label") || !j.at("label").is_string()) fail(ErrorKind::schema, "nonlinearity.label is required");
    const std::string label = j.at("label").get<std::string>();
    const nlohmann::json p = j.value("params", nlohmann::json::object());
    if (label == "identity") return identity();
    if (label == "wavy") return wavy(p.value("amplitude", 0.1));
    if (label == "saturating") return saturating(p.value("gain", 0.2));
    fail(ErrorKind::schema, "unknown nonlinearity.label '" + label + "'");
}

nlohmann::json Nonlinearity::to_json() const
{
    return {{"label", label}, {"params", params}, {"delta1", delta1}, {"delta2", delta2}};
}

NonlinearityValidation validate_nonlinearity(const Nonlinearity& n, int sample_count)
{
    if (sample_count < 100) fail(ErrorKind::precondition, "validate_nonlinearity needs sample_count >= 100");
    NonlinearityValidation r;
    auto note = [&](double s, const std::string& msg) {
        r.passed = false;
        if (std::find(r.violating_s.begin(), r.violating_s.end(), s) == r.violating_s.end()) r.violating_s.push_back(s);
        if (r.messages.size() < 20) {
            std::ostringstream os;
            os << "s = " << s << ": " << msg;
            r.messages.push_back(os.str());
        }
    };
    if (!(n.delta1 > 0.0 && n.delta1 <= n.delta2)) {
        r.passed = false;
        r.messages.push_back("need 0 < delta1 <= delta2");
    }
    if (std::abs(n.phi(0.0)) > 1e-14) note(0.0, "phi(0) != 0");
    for (int k = 0; k < sample_count; ++k) {
        const double s = -10.0 + 20.0 * k / (sample_count - 1);
        const double d = n.phi_prime(s);
        const double slack = 1e-12 * std::max(1.0, std::abs(d));
        if (!(d >= n.delta1 - slack && d <= n.delta2 + slack)) note(s, "phi'(s) = " + std::to_string(d) + " outside [delta1, delta2]");
        if (std::abs(s) <= 2.0) {
            const double h = 1e-4;
            const double fd = (n.phi(s + h) - n.phi(s - h)) / (2.0 * h);
            if (std::abs(fd - d) > 1e-6 * std::max(std::abs(d), 1e-300)) note(s, "phi' disagrees with a centered difference of phi");
        }
    }
    return r;
}

double pressure(const Nonlinearity& n, double s)
{
    if (!(s > 0.0)) fail(ErrorKind::domain, "pressure needs s > 0");
    if (n.is_identity()) return std::log(s);
    const double y = std::log(s);
    if (y == 0.0) return 0.0;
    // xi = e^u turns phi'(xi)/xi dxi into phi'(e^u) du.
    auto f = [&](double u) { return n.phi_prime(std::exp(u)); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, y, 20, 1e-14, &err);
}

PressureTable::PressureTable(Nonlinearity n, double log_min, double log_max, int nodes)
    : n_(std::move(n)), log_min_(log_min), log_max_(log_max)
{
    if (!(log_max_ > log_min_) || nodes < 3) fail(ErrorKind::configuration, "bad pressure table range");
    step_ = (log_max_ - log_min_) / (nodes - 1);
    values_.resize(static_cast<std::size_t>(nodes));
    slopes_.resize(static_cast<std::size_t>(nodes));
    auto f = [&](double u) { return n_.phi_prime(std::exp(u)); };
    // Accumulate from the node nearest log s = 0 in both directions.
    const int zero = std::clamp(static_cast<int>(std::lround(-log_min_ / step_)), 0, nodes - 1);
    const double y0 = log_min_ + zero * step_;
    values_[static_cast<std::size_t>(zero)] = pressure(n_, std::exp(y0));
    for (int k = zero + 1; k < nodes; ++k) {
        const double a = log_min_ + (k - 1) * step_, b = log_min_ + k * step_;
        values_[static_cast<std::size_t>(k)] =
            values_[static_cast<std::size_t>(k - 1)] + boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0);
    }
    for (int k = zero - 1; k >= 0; --k) {
        const double a = log_min_ + k * step_, b = log_min_ + (k + 1) * step_;
        values_[static_cast<std::size_t>(k)] =
            values_[static_cast<std::size_t>(k + 1)] - boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0);
    }
    for (int k = 0; k < nodes; ++k) slopes_[static_cast<std::size_t>(k)] = f(log_min_ + k * step_);
    // Fritsch-Carlson limiter keeps the interpolant monotone.
    for (int k = 0; k + 1 < nodes; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const double delta = (values_[i + 1] - values_[i]) / step_;
        if (delta <= 0.0) {
            slopes_[i] = slopes_[i + 1] = 0.0;
            continue;
        }
        const double a = slopes_[i] / delta, b = slopes_[i + 1] / delta;
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double tau = 3.0 / std::sqrt(r2);
            slopes_[i] = tau * a * delta;
            slopes_[i + 1] = tau * b * delta;
        }
    }
}

double PressureTable::operator()(double s) const
{
    if (!(s > 0.0)) fail(ErrorKind::domain, "pressure needs s > 0");
    if (n_.is_identity()) return std::log(s);
    const double y = std::log(s);
    if (y < log_min_ || y > log_max_) return pressure(n_, s);
    const double q = (y - log_min_) / step_;
    const auto k = std::min(static_cast<std::size_t>(q), values_.size() - 2);
    const double t = q - static_cast<double>(k);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * values_[k] + h10 * step_ * slopes_[k] + h01 * values_[k + 1] + h11 * step_ * slopes_[k + 1];
}

}  // namespace isotherm
