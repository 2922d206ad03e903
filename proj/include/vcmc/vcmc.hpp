#pragma once

#include "vcmc/codec.hpp"
#include "vcmc/dataio/annotations.hpp"
#include "vcmc/dataio/config.hpp"
#include "vcmc/dataio/image_dir.hpp"
#include "vcmc/dataio/report.hpp"
#include "vcmc/dataio/yuv.hpp"
#include "vcmc/detmetrics.hpp"
#include "vcmc/error.hpp"
#include "vcmc/imagecore.hpp"
#include "vcmc/pipeline.hpp"
