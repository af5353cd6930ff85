#ifndef INARMIX_INARMIX_HPP
#define INARMIX_INARMIX_HPP

// Clustering of count time-series panels by finite mixtures of INAR(s*)
// processes: EM estimation, BIC structure search, diagnostics, evaluation
// metrics, a DTW/fuzzy-C-medoids baseline and a simulation-study driver.

#include "baseline.hpp"
#include "eval.hpp"
#include "inar.hpp"
#include "init.hpp"
#include "innovations.hpp"
#include "io.hpp"
#include "mixture.hpp"
#include "nelder_mead.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "selection.hpp"
#include "series.hpp"
#include "simstudy.hpp"

#endif
