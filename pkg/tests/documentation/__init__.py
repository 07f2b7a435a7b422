'''All tests for the .rst documentation.'''
