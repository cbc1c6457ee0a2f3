// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>
