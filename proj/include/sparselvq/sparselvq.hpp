#pragma once

#include "sparselvq/dataset.hpp"
#include "sparselvq/glvq.hpp"
#include "sparselvq/io.hpp"
#include "sparselvq/l1smooth.hpp"
#include "sparselvq/metric.hpp"
#include "sparselvq/trainer.hpp"
#include "sparselvq/types.hpp"
