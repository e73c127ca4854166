#pragma once

// Umbrella header for the motion toolkit.

#include "mtk/errors.hpp"
#include "mtk/motion.hpp"
#include "mtk/taxonomy.hpp"
#include "mtk/clip.hpp"
#include "mtk/io.hpp"
#include "mtk/kinematics.hpp"
#include "mtk/physical_metrics.hpp"
#include "mtk/distribution_metrics.hpp"
#include "mtk/random.hpp"
#include "mtk/stats.hpp"
#include "mtk/parallel.hpp"
#include "mtk/filters.hpp"
#include "mtk/report.hpp"
#include "mtk/viz_scene.hpp"
