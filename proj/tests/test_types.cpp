#include <gtest/gtest.h>

#include "emergelab/coarse_grain.hpp"
#include "emergelab/effective_information.hpp"
#include "emergelab/graph_metrics.hpp"
#include "emergelab/ingest.hpp"
#include "emergelab/rng.hpp"
#include "emergelab/stats.hpp"

TEST(Smoke, Compiles) { SUCCEED(); }
