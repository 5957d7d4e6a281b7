#pragma once

#include "seongdo/api.hpp"
#include "seongdo/astrometry.hpp"
#include "seongdo/atlas.hpp"
#include "seongdo/binary_io.hpp"
#include "seongdo/chart.hpp"
#include "seongdo/constellation.hpp"
#include "seongdo/digest.hpp"
#include "seongdo/error.hpp"
#include "seongdo/fixture.hpp"
#include "seongdo/ingest.hpp"
#include "seongdo/snapshot_io.hpp"
#include "seongdo/spatial_index.hpp"
#include "seongdo/star_packet.hpp"
#include "seongdo/text.hpp"

namespace seongdo {
inline constexpr const char* kVersion = "1.0.0";
}
