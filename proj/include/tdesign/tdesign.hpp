#pragma once

#include "tdesign/analysis.hpp"
#include "tdesign/constructions.hpp"
#include "tdesign/core.hpp"
#include "tdesign/io.hpp"
#include "tdesign/manifold_opt.hpp"
#include "tdesign/scan.hpp"
#include "tdesign/verify.hpp"
