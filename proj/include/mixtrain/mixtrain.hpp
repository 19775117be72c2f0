#pragma once

#include "mixtrain/numerics/interval.hpp"
#include "mixtrain/numerics/rng.hpp"
#include "mixtrain/numerics/rounding.hpp"
#include "mixtrain/numerics/tensor.hpp"

#include "mixtrain/model/gradients.hpp"
#include "mixtrain/model/loss.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/model/serialize.hpp"

#include "mixtrain/analysis/box.hpp"
#include "mixtrain/analysis/robust_loss.hpp"
#include "mixtrain/analysis/symbolic.hpp"

#include "mixtrain/attack/attack.hpp"

#include "mixtrain/data/dataset.hpp"
#include "mixtrain/data/idx.hpp"
#include "mixtrain/data/synthetic.hpp"

#include "mixtrain/train/config.hpp"
#include "mixtrain/train/distribution.hpp"
#include "mixtrain/train/optimizer.hpp"
#include "mixtrain/train/trainer.hpp"

#include "mixtrain/verify/report.hpp"
#include "mixtrain/verify/verifier.hpp"
#include "mixtrain/verify/work_pool.hpp"
