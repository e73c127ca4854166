// Builds a short synthetic clip, scores it, and writes it as a .mot file.
//   ./quickstart [out.mot]

#include <cmath>
#include <iostream>

#include "mtk/mtk.hpp"

int main(int argc, char** argv) {
  const mtk::fs::path out = argc > 1 ? argv[1] : "quickstart.mot";

  // Two joints: a hip swaying along x and a foot sliding on the ground.
  const auto motion = mtk::MotionSequence::from_fn(90, 2, 30.0, [](std::size_t t, std::size_t j) {
    const double s = static_cast<double>(t) / 30.0;
    return j == 0 ? Eigen::Vector3d(0.1 * std::sin(2.0 * s), 0.9, 0.0) : Eigen::Vector3d(0.02 * s, 0.0, 0.0);
  });

  const auto score = mtk::dynamic_score(motion);
  std::cout << "S_temporal " << score.s_temporal << "\nS_spatial  " << score.s_spatial << "\nS_dynamic  "
            << score.s_dynamic << "\n";

  mtk::PhysicalMetricConfig physical;
  physical.foot_joints = {1};
  for (const auto& [name, value] : mtk::compute_clip_metrics(motion, physical)) {
    std::cout << name << " " << value << "\n";
  }

  mtk::write_motion(motion, out);
  std::cout << "wrote " << out.string() << " (" << mtk::read_motion(out).num_frames() << " frames)\n";
}
