#ifndef VOXSURF_VOXSURF_HPP
#define VOXSURF_VOXSURF_HPP

#include "connectivity.hpp"
#include "edt.hpp"
#include "gradient.hpp"
#include "maskprep.hpp"
#include "metaimage.hpp"
#include "phantom.hpp"
#include "reconstruct.hpp"
#include "threading.hpp"
#include "validate.hpp"
#include "volume.hpp"
#include "watershed.hpp"

#endif  // VOXSURF_VOXSURF_HPP
