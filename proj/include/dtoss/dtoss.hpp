#pragma once

#include "dtoss/ceps/baselines.hpp"
#include "dtoss/ceps/clustering.hpp"
#include "dtoss/ceps/iceps.hpp"
#include "dtoss/ceps/patterns.hpp"
#include "dtoss/ceps/prkdtree.hpp"
#include "dtoss/cluster_sim.hpp"
#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"
#include "dtoss/hierarchy.hpp"
#include "dtoss/local_index.hpp"
#include "dtoss/nearest.hpp"
#include "dtoss/parallel.hpp"
#include "dtoss/partitioner.hpp"
#include "dtoss/query.hpp"
#include "dtoss/workload.hpp"
#include "dtoss/zorder.hpp"
