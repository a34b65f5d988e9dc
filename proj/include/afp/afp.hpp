#pragma once

#include "afp/augment.hpp"
#include "afp/cqt.hpp"
#include "afp/denoise.hpp"
#include "afp/engine.hpp"
#include "afp/errors.hpp"
#include "afp/fft.hpp"
#include "afp/index.hpp"
#include "afp/landmarks.hpp"
#include "afp/metrics.hpp"
#include "afp/peaks.hpp"
#include "afp/resample.hpp"
#include "afp/rng.hpp"
#include "afp/spectrogram.hpp"
#include "afp/stft.hpp"
#include "afp/synth.hpp"
#include "afp/wav.hpp"
#include "afp/waveform.hpp"
