major = 0
minor = 1
post = 0

__version__ = f'{major}.{minor}.{post}'
