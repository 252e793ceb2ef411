#pragma once

#include "pjj/beam.hpp"
#include "pjj/coherence.hpp"
#include "pjj/constants.hpp"
#include "pjj/error.hpp"
#include "pjj/fock.hpp"
#include "pjj/mean_field.hpp"
#include "pjj/phase_space.hpp"
#include "pjj/quantum.hpp"
