#pragma once

#include "qperceptron/activation.hpp"
#include "qperceptron/control.hpp"
#include "qperceptron/dynamics.hpp"
#include "qperceptron/io.hpp"
#include "qperceptron/network.hpp"
#include "qperceptron/parallel.hpp"
#include "qperceptron/register.hpp"
#include "qperceptron/synthesis.hpp"
#include "qperceptron/training.hpp"
