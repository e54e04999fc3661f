# Test package for spinchain-qst
