#ifndef EBMEDIT_EBMEDIT_HPP
#define EBMEDIT_EBMEDIT_HPP

#include "common.hpp"
#include "data.hpp"
#include "editor.hpp"
#include "explain.hpp"
#include "model.hpp"
#include "optimize.hpp"
#include "service.hpp"
#include "trainer.hpp"

#endif  // EBMEDIT_EBMEDIT_HPP
