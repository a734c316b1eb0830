#pragma once

#include <cqsim/bath.hpp>
#include <cqsim/csv.hpp>
#include <cqsim/experiment.hpp>
#include <cqsim/field.hpp>
#include <cqsim/parallel.hpp>
#include <cqsim/pde.hpp>
#include <cqsim/rng.hpp>
#include <cqsim/sde.hpp>
#include <cqsim/spectral.hpp>
#include <cqsim/superpotential.hpp>
