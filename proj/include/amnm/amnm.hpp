#pragma once

#include "amnm/random.hpp"
#include "amnm/algebra.hpp"
#include "amnm/multilinear.hpp"
#include "amnm/diagonal.hpp"
#include "amnm/stabilizer.hpp"
#include "amnm/perturbation.hpp"
#include "amnm/tsirelson.hpp"
#include "amnm/instances.hpp"
#include "amnm/io.hpp"
#include "amnm/suite.hpp"
