#pragma once

#include "semsum/baselines.hpp"
#include "semsum/decode.hpp"
#include "semsum/embedding.hpp"
#include "semsum/error.hpp"
#include "semsum/hmm.hpp"
#include "semsum/io.hpp"
#include "semsum/metrics.hpp"
#include "semsum/rng.hpp"
#include "semsum/synthetic.hpp"
#include "semsum/trainer.hpp"
