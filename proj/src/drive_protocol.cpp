#include "atomcavity/drive_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "atomcavity/errors.hpp"

namespace atomcavity {

DriveProtocol::DriveProtocol(std::vector<DriveSegment> segments) : segments_(std::move(segments))
{
    if (segments_.empty()) throw InvalidParameter("drive protocol needs at least one segment");
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        const auto& s = segments_[k];
        if (!(std::isfinite(s.duration) && s.duration > 0))
            throw InvalidParameter("drive segment duration must be positive");
        if (!(s.eps_start >= 0 && s.eps_end >= 0 && std::isfinite(s.eps_start) &&
              std::isfinite(s.eps_end)))
            throw InvalidParameter("pump strength must be finite and non-negative");
        if (k > 0) {
            const double prev = segments_[k - 1].eps_end;
            if (std::abs(prev - s.eps_start) > 1e-12 * std::max(1.0, std::abs(prev)))
                throw InvalidParameter("pump schedule must be continuous across segments");
        }
    }
}

DriveProtocol DriveProtocol::ramp_and_hold(double eps, double ramp, double hold)
{
    return DriveProtocol({{ramp, 0.0, eps}, {hold, eps, eps}});
}

DriveProtocol DriveProtocol::linear_ramp(double eps_end, double duration)
{
    return DriveProtocol({{duration, 0.0, eps_end}});
}

DriveProtocol DriveProtocol::constant(double eps, double duration)
{
    return DriveProtocol({{duration, eps, eps}});
}

double DriveProtocol::pump_at(double t) const
{
    if (segments_.empty()) return 0.0;
    if (t <= 0) return segments_.front().eps_start;
    double start = 0.0;
    for (const auto& s : segments_) {
        if (t <= start + s.duration) {
            const double frac = (t - start) / s.duration;
            return s.eps_start + (s.eps_end - s.eps_start) * frac;
        }
        start += s.duration;
    }
    return segments_.back().eps_end;
}

double DriveProtocol::duration() const
{
    double total = 0.0;
    for (const auto& s : segments_) total += s.duration;
    return total;
}

std::string DriveProtocol::to_string() const
{
    std::string out;
    char buf[96];
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        const auto& s = segments_[k];
        std::snprintf(buf, sizeof buf, "%s%.17g:%.17g:%.17g", k ? "," : "", s.duration,
                      s.eps_start, s.eps_end);
        out += buf;
    }
    return out;
}

DriveProtocol DriveProtocol::parse(const std::string& text)
{
    std::vector<DriveSegment> segs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        DriveSegment s;
        char c1 = 0, c2 = 0;
        std::istringstream is(item);
        if (!(is >> s.duration >> c1 >> s.eps_start >> c2 >> s.eps_end) || c1 != ':' || c2 != ':')
            throw InvalidParameter("malformed protocol segment '" + item + "'");
        segs.push_back(s);
    }
    return DriveProtocol(std::move(segs));
}

}  // namespace atomcavity
