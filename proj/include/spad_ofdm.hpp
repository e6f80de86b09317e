#pragma once

// Everything except the quadrature references (spad_ofdm/validation.hpp),
// which pull in Boost.Math.

#include "spad_ofdm/analytics.hpp"
#include "spad_ofdm/channel.hpp"
#include "spad_ofdm/clipping.hpp"
#include "spad_ofdm/config.hpp"
#include "spad_ofdm/csv.hpp"
#include "spad_ofdm/experiments.hpp"
#include "spad_ofdm/fft.hpp"
#include "spad_ofdm/ofdm.hpp"
#include "spad_ofdm/qam.hpp"
#include "spad_ofdm/spad_model.hpp"
#include "spad_ofdm/special.hpp"
