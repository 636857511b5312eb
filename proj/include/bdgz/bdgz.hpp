#ifndef BDGZ_BDGZ_HPP
#define BDGZ_BDGZ_HPP

#include "bdgz/basis.hpp"
#include "bdgz/bogoliubov.hpp"
#include "bdgz/config.hpp"
#include "bdgz/error.hpp"
#include "bdgz/gp.hpp"
#include "bdgz/grid.hpp"
#include "bdgz/io.hpp"
#include "bdgz/oracle.hpp"
#include "bdgz/pipeline.hpp"
#include "bdgz/quadform.hpp"
#include "bdgz/vacuum.hpp"

#endif  // BDGZ_BDGZ_HPP
