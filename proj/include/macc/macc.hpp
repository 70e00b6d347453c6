#pragma once

#include "combinatorics.hpp"
#include "random.hpp"
#include "pda.hpp"
#include "macc_model.hpp"
#include "conflict_graph.hpp"
#include "coloring.hpp"
#include "delivery.hpp"
#include "converse.hpp"
#include "experiment.hpp"
