#pragma once

#include "corpus.hpp"
#include "entropy_keywords.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "features.hpp"
#include "hash.hpp"
#include "linear_svm.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "segmenter.hpp"
#include "text_io.hpp"
#include "utf8.hpp"
