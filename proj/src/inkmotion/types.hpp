#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

namespace inkmotion {

// Positions are pixels with x to the right and y pointing down. All signed
// areas and orientations in this library are computed on these raw numbers,
// so "positive" (counter-clockwise in the x/y algebra) reads as clockwise on
// a y-down screen.
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace inkmotion
