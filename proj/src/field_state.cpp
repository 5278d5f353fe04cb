#include "atomcavity/field_state.hpp"

#include <cmath>

#include "atomcavity/errors.hpp"

namespace atomcavity {

ModeGrid::ModeGrid(int cutoff) : cutoff_(cutoff)
{
    if (cutoff < 0) throw InvalidParameter("mode cutoff must be non-negative");
    data_.assign(size(), Complex{});
}

double ModeGrid::norm() const
{
    double s = 0.0;
    for (const auto& c : data_) s += std::norm(c);
    return s;
}

FieldState FieldState::homogeneous(int cutoff)
{
    FieldState s;
    s.phi = ModeGrid(cutoff);
    s.phi(0, 0) = 1.0;
    return s;
}

FieldState FieldState::seeded(int cutoff, double amplitude)
{
    FieldState s = homogeneous(cutoff);
    s.phi(0, 0) = std::sqrt(1.0 - 4.0 * amplitude * amplitude);
    for (int n : {-1, 1})
        for (int m : {-1, 1}) s.phi(n, m) = amplitude;
    return s;
}

bool FieldState::finite() const
{
    auto ok = [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); };
    for (const auto& c : phi.data())
        if (!ok(c)) return false;
    return ok(alpha_plus) && ok(alpha_minus);
}

FieldState z2_transform(const FieldState& state)
{
    FieldState out = state;
    const int c = state.phi.cutoff();
    for (int n = -c; n <= c; ++n) {
        if (n % 2 == 0) continue;
        for (int m = -c; m <= c; ++m) out.phi(n, m) = -out.phi(n, m);
    }
    out.alpha_plus = -out.alpha_plus;
    out.alpha_minus = -out.alpha_minus;
    return out;
}

}  // namespace atomcavity
