# Tests for matool
