#ifndef PDFRAC_PDFRAC_HPP
#define PDFRAC_PDFRAC_HPP

#include <pdfrac/cli.hpp>
#include <pdfrac/common.hpp>
#include <pdfrac/config.hpp>
#include <pdfrac/diagnostics.hpp>
#include <pdfrac/dynamics.hpp>
#include <pdfrac/fields.hpp>
#include <pdfrac/io.hpp>
#include <pdfrac/kernels.hpp>
#include <pdfrac/lattice.hpp>
#include <pdfrac/nucleation.hpp>
#include <pdfrac/reference.hpp>

#endif
