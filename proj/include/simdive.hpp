#pragma once

#include <simdive/word.hpp>
#include <simdive/core.hpp>
#include <simdive/correction.hpp>
#include <simdive/random.hpp>
#include <simdive/simd.hpp>
#include <simdive/metrics.hpp>
#include <simdive/apps/image.hpp>
#include <simdive/apps/idx.hpp>
#include <simdive/apps/units.hpp>
#include <simdive/apps/imaging.hpp>
#include <simdive/apps/ann.hpp>
