#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace atomcavity {

using Complex = std::complex<double>;

/// Square grid of plane-wave momentum modes (n, m), n along the pump axis y
/// and m along the cavity axis z, with n, m in [-cutoff, cutoff]. Storage is
/// row-major in n.
class ModeGrid {
public:
    ModeGrid() = default;
    explicit ModeGrid(int cutoff);

    int cutoff() const { return cutoff_; }
    int side() const { return 2 * cutoff_ + 1; }
    std::size_t size() const { return static_cast<std::size_t>(side()) * side(); }

    bool contains(int n, int m) const
    {
        return n >= -cutoff_ && n <= cutoff_ && m >= -cutoff_ && m <= cutoff_;
    }
    std::size_t index(int n, int m) const
    {
        return static_cast<std::size_t>(n + cutoff_) * side() + static_cast<std::size_t>(m + cutoff_);
    }

    Complex& operator()(int n, int m) { return data_[index(n, m)]; }
    const Complex& operator()(int n, int m) const { return data_[index(n, m)]; }

    std::vector<Complex>& data() { return data_; }
    const std::vector<Complex>& data() const { return data_; }

    /// Sum of |phi_{n,m}|^2.
    double norm() const;

    friend bool operator==(const ModeGrid&, const ModeGrid&) = default;

private:
    int cutoff_ = 0;
    std::vector<Complex> data_;
};

/// Atomic momentum amplitudes plus the two circularly polarized cavity
/// amplitudes at one instant. |alpha|^2 is an intracavity photon number.
struct FieldState {
    ModeGrid phi;
    Complex alpha_plus{};
    Complex alpha_minus{};
    double time = 0.0;

    /// Condensate at rest: phi_{0,0} = 1, empty cavity.
    static FieldState homogeneous(int cutoff);

    /// Homogeneous condensate with a small checkerboard admixture of
    /// `amplitude` in each of the four (+-1, +-1) modes, renormalized. The
    /// sign of `amplitude` selects one of the two Z2-related patterns.
    static FieldState seeded(int cutoff, double amplitude);

    bool finite() const;

    friend bool operator==(const FieldState&, const FieldState&) = default;
};

/// Z2 image: phi_{n,m} -> (-1)^n phi_{n,m}, alpha_+- -> -alpha_+-.
FieldState z2_transform(const FieldState& state);

}  // namespace atomcavity
