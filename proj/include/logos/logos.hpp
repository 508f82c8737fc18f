#pragma once

#include "logos/align.hpp"
#include "logos/embedding.hpp"
#include "logos/error.hpp"
#include "logos/eval.hpp"
#include "logos/rng.hpp"
#include "logos/student.hpp"
#include "logos/text.hpp"
#include "logos/train.hpp"
#include "logos/tsv.hpp"
