#pragma once

// Umbrella header: the whole toolkit.

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/geometry.hpp"
#include "lidaraug/core/io.hpp"
#include "lidaraug/core/log.hpp"
#include "lidaraug/core/parallel.hpp"
#include "lidaraug/core/rng.hpp"
#include "lidaraug/core/types.hpp"

#include "lidaraug/radiance/camera.hpp"
#include "lidaraug/radiance/extract.hpp"
#include "lidaraug/radiance/sh.hpp"
#include "lidaraug/radiance/voxel_grid.hpp"

#include "lidaraug/lidarize/lidarize.hpp"
#include "lidaraug/lidarize/range_image.hpp"

#include "lidaraug/intensity/ball_patch.hpp"
#include "lidaraug/intensity/calibration.hpp"
#include "lidaraug/intensity/fps.hpp"
#include "lidaraug/intensity/group_distance.hpp"
#include "lidaraug/intensity/hungarian.hpp"

#include "lidaraug/bank/bank.hpp"
#include "lidaraug/bank/pca_align.hpp"
#include "lidaraug/bank/sampling.hpp"
#include "lidaraug/bank/size_jitter.hpp"

#include "lidaraug/compose/bandit.hpp"
#include "lidaraug/compose/ground.hpp"
#include "lidaraug/compose/occlusion.hpp"
#include "lidaraug/compose/placement.hpp"
#include "lidaraug/compose/raster.hpp"
#include "lidaraug/compose/sweeps.hpp"

#include "lidaraug/eval/balance.hpp"
#include "lidaraug/eval/features.hpp"
#include "lidaraug/eval/frechet.hpp"
