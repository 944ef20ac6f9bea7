#pragma once

#include "rws/dataset.hpp"
#include "rws/env.hpp"
#include "rws/error.hpp"
#include "rws/eval.hpp"
#include "rws/reach.hpp"
#include "rws/relabel.hpp"
#include "rws/rng.hpp"
#include "rws/trainer.hpp"
#include "rws/value.hpp"
#include "rws/weight.hpp"
