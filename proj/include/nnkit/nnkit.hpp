#pragma once

#include "tensor.hpp"
#include "module.hpp"
#include "criterion.hpp"
#include "conv.hpp"
#include "data.hpp"
#include "train.hpp"
#include "parity.hpp"
#include "report.hpp"
#include "checkpoint.hpp"
#include "presets.hpp"
