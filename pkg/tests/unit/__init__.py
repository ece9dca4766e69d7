"""Unit tests for API contracts"""
