#pragma once

// Umbrella header for the full-reference quality engine.

#include "deepwsd/backbone.hpp"
#include "deepwsd/binary_io.hpp"
#include "deepwsd/dataset.hpp"
#include "deepwsd/errors.hpp"
#include "deepwsd/image_io.hpp"
#include "deepwsd/logistic.hpp"
#include "deepwsd/pipeline.hpp"
#include "deepwsd/psnr.hpp"
#include "deepwsd/stats.hpp"
#include "deepwsd/tensor.hpp"
#include "deepwsd/tensor_ops.hpp"
#include "deepwsd/weights.hpp"
#include "deepwsd/wsd.hpp"
