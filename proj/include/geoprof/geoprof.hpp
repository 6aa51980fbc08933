#pragma once

#include "geoprof/classifier.hpp"
#include "geoprof/dataset.hpp"
#include "geoprof/error.hpp"
#include "geoprof/evaluation.hpp"
#include "geoprof/geodesy.hpp"
#include "geoprof/grid.hpp"
#include "geoprof/io.hpp"
#include "geoprof/likelihood.hpp"
#include "geoprof/posterior.hpp"
#include "geoprof/priors.hpp"
#include "geoprof/rossmo.hpp"
#include "geoprof/synthetic.hpp"
