#pragma once

#include "lesionseg/errors.hpp"
#include "lesionseg/raster.hpp"
#include "lesionseg/morphology.hpp"
#include "lesionseg/regions.hpp"
#include "lesionseg/image_io.hpp"
#include "lesionseg/preprocess.hpp"
#include "lesionseg/random.hpp"
#include "lesionseg/kmeans.hpp"
#include "lesionseg/clustering.hpp"
#include "lesionseg/features.hpp"
#include "lesionseg/forest.hpp"
#include "lesionseg/svr.hpp"
#include "lesionseg/model_bundle.hpp"
#include "lesionseg/pipeline.hpp"
#include "lesionseg/training.hpp"
#include "lesionseg/synthetic.hpp"
