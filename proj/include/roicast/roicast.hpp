#pragma once

#include "roicast/channel.hpp"
#include "roicast/correlation.hpp"
#include "roicast/error.hpp"
#include "roicast/huffman.hpp"
#include "roicast/media_io.hpp"
#include "roicast/metrics.hpp"
#include "roicast/pipeline.hpp"
#include "roicast/power_alloc.hpp"
#include "roicast/receiver.hpp"
#include "roicast/roi_coding.hpp"
#include "roicast/sideinfo.hpp"
#include "roicast/synthetic.hpp"
#include "roicast/transform.hpp"
