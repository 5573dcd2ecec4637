#pragma once

#include "vigil/config.hpp"
#include "vigil/csv.hpp"
#include "vigil/dsp.hpp"
#include "vigil/errors.hpp"
#include "vigil/eval/grid.hpp"
#include "vigil/eval/metrics.hpp"
#include "vigil/eval/scheme.hpp"
#include "vigil/eval/splits.hpp"
#include "vigil/features.hpp"
#include "vigil/ica.hpp"
#include "vigil/labeling.hpp"
#include "vigil/models/train.hpp"
#include "vigil/pipeline.hpp"
#include "vigil/recording.hpp"
#include "vigil/report.hpp"
#include "vigil/rng.hpp"
#include "vigil/runner.hpp"
#include "vigil/synth.hpp"
