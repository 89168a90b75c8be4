# Empty file to make autopriv tests a Python package
