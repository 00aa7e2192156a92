#ifndef COHART_COHART_HPP
#define COHART_COHART_HPP

#include "cohart/basis.hpp"
#include "cohart/bessel.hpp"
#include "cohart/coherence.hpp"
#include "cohart/config.hpp"
#include "cohart/errors.hpp"
#include "cohart/frame.hpp"
#include "cohart/geometry.hpp"
#include "cohart/mask.hpp"
#include "cohart/mle.hpp"
#include "cohart/optim.hpp"
#include "cohart/pipeline.hpp"
#include "cohart/povm.hpp"
#include "cohart/simulate.hpp"
#include "cohart/source.hpp"
#include "cohart/spot.hpp"
#include "cohart/stitch.hpp"
#include "cohart/units.hpp"

#endif
