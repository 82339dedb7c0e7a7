#pragma once

// Everything except the command-line layer (ghsim/cli), which needs yaml-cpp.

#include "ghsim/core/error.hpp"
#include "ghsim/core/event.hpp"
#include "ghsim/core/hash.hpp"
#include "ghsim/core/random.hpp"
#include "ghsim/core/state.hpp"
#include "ghsim/core/time.hpp"
#include "ghsim/engine/model.hpp"
#include "ghsim/engine/partition.hpp"
#include "ghsim/engine/run.hpp"
#include "ghsim/engine/schedule.hpp"
#include "ghsim/ingest/bipartite.hpp"
#include "ghsim/ingest/io.hpp"
#include "ghsim/ingest/slice.hpp"
#include "ghsim/metrics/metrics.hpp"
#include "ghsim/metrics/report.hpp"
#include "ghsim/models/bayesian.hpp"
#include "ghsim/models/embedding.hpp"
#include "ghsim/models/features.hpp"
#include "ghsim/models/linalg.hpp"
#include "ghsim/models/lpe.hpp"
#include "ghsim/models/newentity.hpp"
#include "ghsim/models/powerlaw.hpp"
#include "ghsim/models/rank.hpp"
#include "ghsim/models/s3d.hpp"
#include "ghsim/models/stationary.hpp"
#include "ghsim/synth/synth.hpp"
