#pragma once

#include <stdexcept>
#include <vector>

#include "wsmatch/sample.hpp"

namespace wsmatch {

// One outcome event whose conditional probability is matched across
// treatment arms.  The matching machinery only ever sees indicators of
// events, so discrete outcomes and joint sector/level outcomes ride through
// the same code path as plain CDF evaluations.
enum class EventKind {
  cdf_leq,     // 1{Y <= y}
  category,    // 1{Y == j}
  sector_a,    // 1{W == a}
  sector_leq,  // 1{W == a, Y <= y}
};

struct Event {
  EventKind kind = EventKind::cdf_leq;
  double y = 0.0;
  int j = 0;
};

inline double event_response(const Event& e, double y, Sector w) {
  switch (e.kind) {
    case EventKind::cdf_leq: return y <= e.y ? 1.0 : 0.0;
    case EventKind::category: return static_cast<int>(y) == e.j ? 1.0 : 0.0;
    case EventKind::sector_a: return w == Sector::a ? 1.0 : 0.0;
    case EventKind::sector_leq: return (w == Sector::a && y <= e.y) ? 1.0 : 0.0;
  }
  throw std::logic_error("event_response: unknown event kind");
}

inline double event_response(const Event& e, const Observation& o) {
  return event_response(e, o.y, o.w);
}

struct EventFamily {
  enum class Kind { cdf, category, roy_joint } kind = Kind::cdf;
  std::vector<double> y_points;  // cdf / roy_joint thresholds, ascending
  int num_choices = 0;           // category: labels 0 .. num_choices-1

  std::vector<Event> events() const {
    std::vector<Event> out;
    switch (kind) {
      case Kind::cdf:
        for (double y : y_points) out.push_back({EventKind::cdf_leq, y, 0});
        break;
      case Kind::category:
        for (int j = 0; j < num_choices; ++j) out.push_back({EventKind::category, 0.0, j});
        break;
      case Kind::roy_joint:
        out.push_back({EventKind::sector_a, 0.0, 0});
        for (double y : y_points) out.push_back({EventKind::sector_leq, y, 0});
        break;
    }
    return out;
  }

  // Index range [first, last) of events that form a monotone CDF run in y
  // (used for the isotonic cleanup; category indicators are left alone).
  std::pair<std::size_t, std::size_t> monotone_run() const {
    switch (kind) {
      case Kind::cdf: return {0, y_points.size()};
      case Kind::category: return {0, 0};
      case Kind::roy_joint: return {1, 1 + y_points.size()};
    }
    throw std::logic_error("monotone_run: unknown family kind");
  }
};

inline EventFamily make_cdf_family(std::vector<double> y_points) {
  return {EventFamily::Kind::cdf, std::move(y_points), 0};
}
inline EventFamily make_category_family(int num_choices) {
  return {EventFamily::Kind::category, {}, num_choices};
}
inline EventFamily make_roy_family(std::vector<double> y_points) {
  return {EventFamily::Kind::roy_joint, std::move(y_points), 0};
}

}  // namespace wsmatch
