#ifndef LIPP_GEOMETRY_H
#define LIPP_GEOMETRY_H

#include <cmath>

namespace lipp {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double euclid(Point const &a, Point const &b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline bool isFinite(Point const &p)
{
    return std::isfinite(p.x) && std::isfinite(p.y);
}

}  // namespace lipp

#endif  // LIPP_GEOMETRY_H
