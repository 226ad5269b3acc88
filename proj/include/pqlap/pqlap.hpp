// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/error.hpp>
#include <pqlap/mesh.hpp>
#include <pqlap/problem.hpp>
#include <pqlap/functionals.hpp>
#include <pqlap/cone.hpp>
#include <pqlap/rayleigh.hpp>
#include <pqlap/eigensolver.hpp>
#include <pqlap/verify.hpp>
