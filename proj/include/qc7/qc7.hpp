#pragma once

// Umbrella header.

#include "qc7/algebra_suite.hpp"
#include "qc7/errors.hpp"
#include "qc7/ledger.hpp"
#include "qc7/linalg.hpp"
#include "qc7/models.hpp"
#include "qc7/parallel.hpp"
#include "qc7/poly.hpp"
#include "qc7/quatalg.hpp"
#include "qc7/rational.hpp"
#include "qc7/report.hpp"
#include "qc7/sampling.hpp"
#include "qc7/scalarops.hpp"
#include "qc7/spectral.hpp"
