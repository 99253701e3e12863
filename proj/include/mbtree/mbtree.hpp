#ifndef MBTREE_MBTREE_HPP
#define MBTREE_MBTREE_HPP

#include "capture.hpp"
#include "config.hpp"
#include "detect.hpp"
#include "dirpiz.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "io.hpp"
#include "mltree.hpp"
#include "net.hpp"
#include "parallel.hpp"
#include "pcap.hpp"
#include "similarity.hpp"
#include "synthgen.hpp"
#include "theory.hpp"
#include "tls.hpp"
#include "version.hpp"

#endif  // MBTREE_MBTREE_HPP
