#include "brute_force_tcl.hpp"

#include <algorithm>
#include <cmath>

namespace semap::oracle {

namespace {

constexpr double kNear = 0.1;
constexpr double kMargin = 1.0;
constexpr int kVoid = 255;

struct Sighting {
  double u;
  double v;
  double d;
};

bool inside(double u, double v, int w, int h) {
  return u >= kMargin && u <= w - kMargin && v >= kMargin && v <= h - kMargin;
}

int lookup(const LabelMap& map, double u, double v) {
  const long x = std::lround(u);
  const long y = std::lround(v);
  if (x < 0 || y < 0 || x >= map.width() || y >= map.height()) return kVoid;
  return map.at(static_cast<int>(x), static_cast<int>(y));
}

}  // namespace

std::vector<std::vector<PointLabel>> bruteForceLabels(const SequenceDataset& ds, int window, bool stereo,
                                                      double dist_min) {
  const double fx = ds.rig.intrinsics.fx;
  const double fy = ds.rig.intrinsics.fy;
  const double cx = ds.rig.intrinsics.cx;
  const double cy = ds.rig.intrinsics.cy;
  const int width = ds.rig.intrinsics.width;
  const int height = ds.rig.intrinsics.height;
  const int classes = static_cast<int>(ds.palette.classCount());
  const int n = static_cast<int>(ds.keyframes.size());

  std::vector<std::vector<PointLabel>> out(ds.keyframes.size());
  for (int k = 0; k < n; ++k) {
    const Keyframe& host = ds.keyframes[k];
    const Mat3& rk = host.pose.rotation();
    const Vec3& tk = host.pose.translation();
    for (const SparsePoint& p : host.points) {
      const double z = 1.0 / p.inv_depth;
      const double xc[3] = {(p.u - cx) / fx * z, (p.v - cy) / fy * z, z};
      double xw[3];
      for (int r = 0; r < 3; ++r) xw[r] = rk(r, 0) * xc[0] + rk(r, 1) * xc[1] + rk(r, 2) * xc[2] + tk[r];

      std::vector<double> votes(classes, 0.0);
      for (int c = 0; c < classes; ++c) {
        for (int j = std::max(0, k - window); j <= std::min(n - 1, k + window); ++j) {
          const Keyframe& target = ds.keyframes[j];
          Sighting s{};
          if (j == k) {
            s = {p.u, p.v, p.inv_depth};
          } else {
            const Mat3& rj = target.pose.rotation();
            const Vec3& tj = target.pose.translation();
            double q[3];
            for (int r = 0; r < 3; ++r) {
              q[r] = rj(0, r) * (xw[0] - tj[0]) + rj(1, r) * (xw[1] - tj[1]) + rj(2, r) * (xw[2] - tj[2]);
            }
            if (q[2] <= kNear) continue;
            s = {fx * q[0] / q[2] + cx, fy * q[1] / q[2] + cy, 1.0 / q[2]};
            if (!inside(s.u, s.v, width, height)) continue;
          }
          const bool accepted = dist_min == 0.0 || s.d < 1.0 / dist_min;
          if (accepted && lookup(target.labels_left, s.u, s.v) == c) votes[c] += s.d;
          if (stereo) {
            const double ur = s.u - fx * ds.rig.baseline * s.d;
            if (inside(ur, s.v, width, height) && accepted && lookup(*target.labels_right, ur, s.v) == c) {
              votes[c] += s.d;
            }
          }
        }
      }

      const int host_label = lookup(host.labels_left, p.u, p.v);
      double best = 0.0;
      for (double v : votes) best = std::max(best, v);
      PointLabel label;
      if (best > 0.0) {
        if (host_label != kVoid && host_label < classes && votes[host_label] == best) {
          label = static_cast<ClassId>(host_label);
        } else {
          for (int c = 0; c < classes && !label; ++c) {
            if (votes[c] == best) label = static_cast<ClassId>(c);
          }
        }
      }
      out[k].push_back(label);
    }
  }
  return out;
}

}  // namespace semap::oracle
