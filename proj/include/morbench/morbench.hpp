#pragma once

#include "morbench/bilstm.hpp"
#include "morbench/config.hpp"
#include "morbench/corpus.hpp"
#include "morbench/embeddings.hpp"
#include "morbench/error.hpp"
#include "morbench/eval.hpp"
#include "morbench/lstm.hpp"
#include "morbench/mlp.hpp"
#include "morbench/optim.hpp"
#include "morbench/predictor.hpp"
#include "morbench/preprocess.hpp"
#include "morbench/rng.hpp"
#include "morbench/serialize.hpp"
#include "morbench/svm.hpp"
#include "morbench/tfidf.hpp"
