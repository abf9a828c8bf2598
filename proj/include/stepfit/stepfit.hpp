#pragma once

// Umbrella header for the whole library.

#include <stepfit/curve.hpp>
#include <stepfit/errors.hpp>
#include <stepfit/evaluation.hpp>
#include <stepfit/hour.hpp>
#include <stepfit/io.hpp>
#include <stepfit/node_selection.hpp>
#include <stepfit/oracle.hpp>
#include <stepfit/parallel.hpp>
#include <stepfit/price.hpp>
#include <stepfit/projection.hpp>
#include <stepfit/report.hpp>
#include <stepfit/rng.hpp>
#include <stepfit/summation.hpp>
#include <stepfit/weighting.hpp>
