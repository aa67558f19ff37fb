#pragma once

#include "hauser/text.hpp"
#include "hauser/lexicon.hpp"
#include "hauser/simile.hpp"
#include "hauser/reference_index.hpp"
#include "hauser/classifier.hpp"
#include "hauser/scoring.hpp"
#include "hauser/stats.hpp"
#include "hauser/ranking.hpp"
#include "hauser/ngram.hpp"
#include "hauser/ratings.hpp"
#include "hauser/meta_eval.hpp"
