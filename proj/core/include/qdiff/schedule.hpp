#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "qdiff/errors.hpp"
#include "qdiff/vec3.hpp"

namespace qdiff {

/// Piecewise-constant time schedule. Segment k is active on
/// [start_k, start_{k+1}); the last segment extends to infinity.
template <class V>
class Schedule {
public:
    struct Segment {
        double t_start;
        V value;
        friend bool operator==(const Segment&, const Segment&) = default;
    };

    Schedule() : Schedule(V{}) {}

    /// Constant schedule starting at t = 0.
    explicit Schedule(V constant) : segments_{{0.0, std::move(constant)}} {}

    explicit Schedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
        if (segments_.empty()) throw InvalidInput("schedule needs at least one segment");
        for (std::size_t k = 1; k < segments_.size(); ++k) {
            if (!(segments_[k].t_start > segments_[k - 1].t_start))
                throw InvalidInput("schedule segment start times must be strictly increasing");
        }
    }

    const V& at(double t) const {
        if (t < segments_.front().t_start)
            throw InvalidInput("schedule lookup at t=" + std::to_string(t) +
                               " precedes the first segment");
        auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double x, const Segment& s) { return x < s.t_start; });
        return std::prev(it)->value;
    }

    double first_start() const { return segments_.front().t_start; }
    const std::vector<Segment>& segments() const { return segments_; }

    /// Segment starts strictly inside (t0, t1).
    std::vector<double> breakpoints_in(double t0, double t1) const {
        std::vector<double> out;
        for (const auto& s : segments_)
            if (s.t_start > t0 && s.t_start < t1) out.push_back(s.t_start);
        return out;
    }

    friend bool operator==(const Schedule&, const Schedule&) = default;

private:
    std::vector<Segment> segments_;
};

using FieldSchedule = Schedule<Vec3>;
using CouplingSchedule = Schedule<Mat3>;

}  // namespace qdiff
