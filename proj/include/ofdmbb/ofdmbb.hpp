#ifndef OFDMBB_OFDMBB_HPP
#define OFDMBB_OFDMBB_HPP

#include "ofdmbb/fixed.hpp"
#include "ofdmbb/tables.hpp"
#include "ofdmbb/fft64.hpp"
#include "ofdmbb/txref.hpp"
#include "ofdmbb/channel.hpp"
#include "ofdmbb/sync.hpp"
#include "ofdmbb/chanest.hpp"
#include "ofdmbb/equalizer.hpp"
#include "ofdmbb/receiver.hpp"
#include "ofdmbb/golden.hpp"
#include "ofdmbb/io.hpp"
#include "ofdmbb/harness.hpp"

#endif
