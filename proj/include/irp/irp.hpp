#pragma once

#include "irp/anchors.hpp"
#include "irp/classify.hpp"
#include "irp/error.hpp"
#include "irp/experiments.hpp"
#include "irp/io.hpp"
#include "irp/metrics.hpp"
#include "irp/random.hpp"
#include "irp/relative.hpp"
#include "irp/spaces.hpp"
#include "irp/synth.hpp"
#include "irp/translator.hpp"
