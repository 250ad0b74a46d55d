#pragma once

#include "warmdiff/bigram.hpp"
#include "warmdiff/core.hpp"
#include "warmdiff/decoder.hpp"
#include "warmdiff/denoiser.hpp"
#include "warmdiff/error.hpp"
#include "warmdiff/proposal.hpp"
#include "warmdiff/rng.hpp"
#include "warmdiff/stats.hpp"
#include "warmdiff/warmstart.hpp"
