# Core module

