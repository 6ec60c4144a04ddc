#ifndef IRMKIT_IRMKIT_HPP
#define IRMKIT_IRMKIT_HPP

#include "irmkit/bench.hpp"
#include "irmkit/errors.hpp"
#include "irmkit/evaluate.hpp"
#include "irmkit/graph.hpp"
#include "irmkit/io.hpp"
#include "irmkit/model.hpp"
#include "irmkit/netstats.hpp"
#include "irmkit/partition.hpp"
#include "irmkit/random.hpp"
#include "irmkit/sampler.hpp"
#include "irmkit/simulate.hpp"

#endif  // IRMKIT_IRMKIT_HPP
