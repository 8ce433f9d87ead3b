#pragma once

#include "streampca/config.hpp"
#include "streampca/covariance_model.hpp"
#include "streampca/experiments.hpp"
#include "streampca/init.hpp"
#include "streampca/io.hpp"
#include "streampca/jacobi.hpp"
#include "streampca/linalg.hpp"
#include "streampca/metrics.hpp"
#include "streampca/oja.hpp"
#include "streampca/parallel.hpp"
#include "streampca/rng.hpp"
#include "streampca/streams.hpp"
